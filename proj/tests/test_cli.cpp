// End-to-end checks of the qroute binary: exit codes, output schemas, and
// byte-level reproducibility. The binary path comes in via QROUTE_BIN.

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qroute_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path operator/(const std::string& name) const { return path / name; }
};

RunResult run(const TempDir& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd =
      std::string(QROUTE_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// A small but complete log: enough activity for a full train/evaluate pass.
std::string make_corpus(const TempDir& dir) {
  const fs::path p = dir / "events.csv";
  RunResult r = run(dir, "synth --out " + p.string() +
                             " --clusters 3 --users 18 --crops 9 --questions 80"
                             " --answers-mean 2 --noise 0.1 --span 80000 --seed 11");
  REQUIRE(r.code == 0);
  return p.string();
}

std::string train_flags(const std::string& input, const fs::path& emb, const fs::path& scorer) {
  return "train --input " + input + " --emb-out " + emb.string() + " --scorer-out " +
         scorer.string() + " --dim 8 --epochs 2 --walks-per-node 3 --walk-length 12 --seed 42";
}

}  // namespace

TEST_CASE("cli: synth is deterministic and validates config") {
  TempDir dir;
  RunResult a = run(dir, "synth --out " + (dir / "a.csv").string() + " --questions 100 --seed 7");
  RunResult b = run(dir, "synth --out " + (dir / "b.csv").string() + " --questions 100 --seed 7");
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(a.out.find("questions=100") != std::string::npos);

  RunResult c = run(dir, "synth --out " + (dir / "c.csv").string() + " --clusters 10 --crops 5");
  CHECK(c.code == 2);

  RunResult d = run(dir, "synth --out " + (dir / "d.csv").string() + " --questions 100 --seed 8");
  CHECK(slurp(dir / "a.csv") != slurp(dir / "d.csv"));
}

TEST_CASE("cli: default synth census reports the stated question count") {
  TempDir dir;
  RunResult r = run(dir, "synth --out " + (dir / "big.csv").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("questions=5000") != std::string::npos);
}

TEST_CASE("cli: stats emits the report and histogram files") {
  TempDir dir;
  write(dir / "four.csv",
        "etype,user,question,crop,time\n"
        "asked,ask,q1,,100\n"
        "answered,u1,q1,,160\n"
        "answered,u2,q1,,200\n"
        "answered,u3,q1,,300\n"
        "answered,u4,q1,,400\n");
  RunResult r =
      run(dir, "stats --input " + (dir / "four.csv").string() + " --outdir " + dir.path.string());
  CHECK(r.code == 0);
  // the asker never answers: five users, four with one answer each
  CHECK(r.out.find("gini_answers = 0.200000") != std::string::npos);
  CHECK(r.out.find("time_to_first_answer_p50 = 60") != std::string::npos);
  CHECK(slurp(dir / "answers_per_question.csv") == "answers,questions\n4,1\n");
  CHECK(slurp(dir / "time_to_first_answer.csv") == "question,seconds\nq1,60\n");
}

TEST_CASE("cli: stats reports gini 0 for equal answer counts") {
  TempDir dir;
  write(dir / "equal.csv",
        "etype,user,question,crop,time\n"
        "answered,u1,q1,,160\n"
        "answered,u2,q1,,200\n"
        "answered,u3,q2,,300\n"
        "answered,u4,q2,,400\n");
  RunResult r =
      run(dir, "stats --input " + (dir / "equal.csv").string() + " --outdir " + dir.path.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("gini_answers = 0.000000") != std::string::npos);
}

TEST_CASE("cli: parse errors name the line and exit 2") {
  TempDir dir;
  write(dir / "bad.csv",
        "etype,user,question,crop,time\n"
        "asked,u1,q1,,100\n"
        "asked,u2,q2,,nonsense\n");
  RunResult r = run(dir, "stats --input " + (dir / "bad.csv").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("cli: train writes the advertised formats deterministically") {
  TempDir dir;
  const std::string input = make_corpus(dir);
  const std::string before = slurp(input);

  RunResult r1 = run(dir, train_flags(input, dir / "emb1.txt", dir / "sc1.txt"));
  REQUIRE(r1.code == 0);
  CHECK(r1.err.find("stage sgns") != std::string::npos);

  const std::string emb = slurp(dir / "emb1.txt");
  std::istringstream in(emb);
  std::size_t n = 0, d = 0;
  in >> n >> d;
  CHECK(d == 8);
  CHECK(n > 0);
  std::string key;
  in >> key;
  CHECK((key[0] == 'u' || key[0] == 'q' || key[0] == 'c'));
  CHECK(key[1] == ':');

  const std::string scorer = slurp(dir / "sc1.txt");
  CHECK(scorer.rfind("scorer v1 dim=8\n", 0) == 0);

  RunResult r2 = run(dir, train_flags(input, dir / "emb2.txt", dir / "sc2.txt"));
  REQUIRE(r2.code == 0);
  CHECK(slurp(dir / "emb1.txt") == slurp(dir / "emb2.txt"));
  CHECK(slurp(dir / "sc1.txt") == slurp(dir / "sc2.txt"));

  // inputs are never mutated
  CHECK(slurp(input) == before);
}

TEST_CASE("cli: evaluate emits the report schema and is reproducible") {
  TempDir dir;
  const std::string input = make_corpus(dir);
  REQUIRE(run(dir, train_flags(input, dir / "emb.txt", dir / "sc.txt")).code == 0);

  const std::string eval_cmd = "evaluate --input " + input + " --emb " +
                               (dir / "emb.txt").string() + " --scorer " +
                               (dir / "sc.txt").string() + " --seed 42";
  RunResult r = run(dir, eval_cmd + " --out " + (dir / "rep1.txt").string() +
                             " --dump-test-cases " + (dir / "cases.csv").string());
  REQUIRE(r.code == 0);
  const std::string rep = slurp(dir / "rep1.txt");
  for (const char* key :
       {"n_cases = ", "coverage = ", "recall@10 = ", "mrr = ", "ndcg@10 = ",
        "baseline_random_recall@10 = ", "baseline_popularity_recall@10 = "})
    CHECK(rep.find(key) != std::string::npos);
  CHECK(slurp(dir / "cases.csv").rfind("question,asker,crops,answerers\n", 0) == 0);

  RunResult r2 = run(dir, eval_cmd + " --out " + (dir / "rep2.txt").string());
  REQUIRE(r2.code == 0);
  CHECK(rep == slurp(dir / "rep2.txt"));
}

TEST_CASE("cli: evaluate rejects mismatched artifact dims with exit 2") {
  TempDir dir;
  const std::string input = make_corpus(dir);
  REQUIRE(run(dir, train_flags(input, dir / "emb.txt", dir / "sc.txt")).code == 0);
  // a d=16 scorer against d=8 embeddings
  std::string fake = "scorer v1 dim=16\n";
  for (int i = 0; i < 19; ++i) fake += "0.5\n";
  write(dir / "sc16.txt", fake);
  RunResult r = run(dir, "evaluate --input " + input + " --emb " + (dir / "emb.txt").string() +
                             " --scorer " + (dir / "sc16.txt").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("dim") != std::string::npos);
}

TEST_CASE("cli: recommend contract, fallback, and tie order") {
  TempDir dir;
  const std::string input = make_corpus(dir);
  REQUIRE(run(dir, train_flags(input, dir / "emb.txt", dir / "sc.txt")).code == 0);
  const std::string base = "recommend --input " + input + " --emb " +
                           (dir / "emb.txt").string() + " --scorer " + (dir / "sc.txt").string();

  // in-vocabulary crop probe: top-k rows, scores descending
  RunResult r = run(dir, base + " --asker u0 --crops c0 --top-k 5");
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "question,rank,user,score");
  double prev = 1e30;
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    const double score = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(score <= prev);
    prev = score;
  }
  CHECK(rows == 5);

  // unknown asker and crops: popularity fallback noted on stderr, same schema
  RunResult f = run(dir, base + " --asker stranger --crops weeds --top-k 5");
  REQUIRE(f.code == 0);
  CHECK(f.err.find("cold start") != std::string::npos);
  int frows = 0;
  std::istringstream flines(f.out);
  std::getline(flines, line);
  std::string prev_user;
  double prev_score = 1e30;
  while (std::getline(flines, line)) {
    ++frows;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.rfind(',');
    const std::string user = line.substr(c2 + 1, c3 - c2 - 1);
    const double score = std::stod(line.substr(c3 + 1));
    if (score == prev_score) CHECK(prev_user < user);  // ascending id on ties
    CHECK(score <= prev_score);
    prev_score = score;
    prev_user = user;
  }
  CHECK(frows == 5);
}

TEST_CASE("cli: recommend with no candidates exits 3") {
  TempDir dir;
  // train side holds a single ask and no answers: the candidate pool is
  // empty. Artifacts are hand-written to match that two-node graph.
  write(dir / "thin.csv",
        "etype,user,question,crop,time\n"
        "asked,u1,q1,,1\n"
        "asked,u2,q2,,50\n"
        "answered,u3,q2,,60\n"
        "answered,u3,q1,,70\n");
  write(dir / "emb.txt", "2 2\nu:0 0.1 0.2\nq:0 0.3 0.4\n");
  write(dir / "sc.txt", "scorer v1 dim=2\n0.5\n0.5\n0.5\n0.5\n0.1\n");
  RunResult r = run(dir, "recommend --input " + (dir / "thin.csv").string() + " --emb " +
                             (dir / "emb.txt").string() + " --scorer " +
                             (dir / "sc.txt").string() + " --asker u9 --cutoff-time 10");
  CHECK(r.code == 3);
  CHECK(r.err.find("candidate") != std::string::npos);
}

TEST_CASE("cli: unknown flags and missing files exit 2, help exits 0") {
  TempDir dir;
  CHECK(run(dir, "synth --frobnicate").code == 2);
  CHECK(run(dir, "stats --input /nonexistent/x.csv").code == 2);
  CHECK(run(dir, "--help").code == 0);
}
