#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qroute/metrics.hpp"
#include "qroute/rng.hpp"

using namespace qroute;

namespace {

// Brute-force references, written set-theoretically and independently of the
// library implementations.
double recall_bruteforce(const std::vector<std::string>& ranking, const RelevantSet& rel,
                         std::size_t k) {
  std::vector<std::string> top(ranking.begin(),
                               ranking.begin() + std::min(k, ranking.size()));
  std::size_t inter = 0;
  for (const std::string& r : rel)
    inter += std::find(top.begin(), top.end(), r) != top.end();
  return double(inter) / double(rel.size());
}

double rr_bruteforce(const std::vector<std::string>& ranking, const RelevantSet& rel) {
  for (std::size_t pos = 1; pos <= ranking.size(); ++pos)
    if (rel.count(ranking[pos - 1])) return 1.0 / double(pos);
  return 0.0;
}

double ndcg_bruteforce(const std::vector<std::string>& ranking, const RelevantSet& rel,
                       std::size_t k) {
  double dcg = 0.0;
  for (std::size_t pos = 1; pos <= std::min(k, ranking.size()); ++pos)
    if (rel.count(ranking[pos - 1])) dcg += 1.0 / (std::log(double(pos + 1)) / std::log(2.0));
  double idcg = 0.0;
  for (std::size_t pos = 1; pos <= std::min(k, rel.size()); ++pos)
    idcg += 1.0 / (std::log(double(pos + 1)) / std::log(2.0));
  return dcg / idcg;
}

struct RandomInstance {
  std::vector<std::string> ranking;
  RelevantSet relevant;
  std::size_t k;
};

RandomInstance random_instance(Rng& rng) {
  RandomInstance inst;
  const std::size_t n_users = 5 + rng.below(40);
  std::vector<std::string> universe;
  for (std::size_t i = 0; i < n_users; ++i) universe.push_back("u" + std::to_string(i));
  // ranking: shuffled subset
  inst.ranking = universe;
  for (std::size_t i = inst.ranking.size(); i > 1; --i)
    std::swap(inst.ranking[i - 1], inst.ranking[rng.below(i)]);
  inst.ranking.resize(1 + rng.below(n_users));
  // relevant: non-empty subset of the universe (may miss the ranking)
  const std::size_t n_rel = 1 + rng.below(6);
  for (std::size_t i = 0; i < n_rel; ++i) inst.relevant.insert(universe[rng.below(n_users)]);
  inst.k = 1 + rng.below(15);
  return inst;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("gini anchors") {
  CHECK(gini({1, 1, 1, 1}) == 0.0);
  CHECK(gini({0, 0, 0, 4}) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(gini({}) == 0.0);
  CHECK(gini({0, 0}) == 0.0);  // zero total
}

TEST_CASE("gini is scale invariant") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(10);
    for (double& x : xs) x = std::floor(rng.uniform01() * 20.0);
    const double g1 = gini(xs);
    for (double& x : xs) x *= 7.5;
    CHECK(gini(xs) == doctest::Approx(g1).epsilon(1e-12));
  }
}

TEST_CASE("characterize counts answers and the min-rule first answer") {
  EventLog log;
  log.events.push_back({EventType::Asked, "u1", "q1", "", 100});
  log.events.push_back({EventType::Answered, "u2", "q1", "", 200});
  log.events.push_back({EventType::Answered, "u3", "q1", "", 160});
  log.events.push_back({EventType::Asked, "u1", "q2", "", 300});

  ActivityReport rep = characterize(log);
  CHECK(rep.answers_per_question.at(0) == 1);  // q2 unanswered
  CHECK(rep.answers_per_question.at(2) == 1);  // q1 got two
  REQUIRE(rep.time_to_first_answer.size() == 1);
  CHECK(rep.time_to_first_answer[0].second == 60);
  CHECK(*rep.ttfa_p50 == 60);
  CHECK(rep.per_user_asked.at("u1") == 2);
  CHECK(rep.per_user_answered.at("u2") == 1);
  CHECK(rep.n_users == 3);
}

TEST_CASE("characterize gini cases") {
  // four users, one answer each: perfect equality
  EventLog log;
  log.events.push_back({EventType::Asked, "ask", "q1", "", 1});
  for (int i = 0; i < 4; ++i)
    log.events.push_back({EventType::Answered, "u" + std::to_string(i), "q1", "", 2 + i});
  ActivityReport rep = characterize(log);
  // the asker has zero answers, so inequality comes only from them
  std::vector<double> xs{0, 1, 1, 1, 1};
  CHECK(rep.gini_answers == doctest::Approx(gini(xs)));

  EventLog log2;
  log2.events.push_back({EventType::Asked, "u0", "q1", "", 1});
  for (int i = 0; i < 4; ++i)
    log2.events.push_back({EventType::Answered, "u0", "q" + std::to_string(i), "", 5});
  log2.events.push_back({EventType::Interested, "u1", "", "c1", kNoTime});
  log2.events.push_back({EventType::Interested, "u2", "", "c1", kNoTime});
  log2.events.push_back({EventType::Interested, "u3", "", "c1", kNoTime});
  ActivityReport rep2 = characterize(log2);
  CHECK(rep2.gini_answers == doctest::Approx(0.75));  // [0,0,0,4]
}

TEST_CASE("characterize is permutation invariant") {
  SynthConfig cfg;
  cfg.n_clusters = 3;
  cfg.n_users = 20;
  cfg.n_crops = 6;
  cfg.n_questions = 60;
  cfg.seed = 2;
  EventLog log = synth_generate(cfg);
  ActivityReport a = characterize(log);

  Rng rng(77);
  for (std::size_t i = log.events.size(); i > 1; --i)
    std::swap(log.events[i - 1], log.events[rng.below(i)]);
  ActivityReport b = characterize(log);

  CHECK(a.answers_per_question == b.answers_per_question);
  CHECK(a.gini_answers == b.gini_answers);
  CHECK(a.top1pct_answer_share == b.top1pct_answer_share);
  CHECK(*a.ttfa_p90 == *b.ttfa_p90);
  CHECK(a.per_user_answered == b.per_user_answered);
}

TEST_CASE("ranking metric anchors") {
  RelevantSet rel{"u1", "u4"};
  std::vector<std::string> ranking{"u1", "u2", "u3"};
  CHECK(recall_at_k(ranking, rel, 2) == 0.5);
  CHECK(recall_at_k({"u1", "u4"}, rel, 5) == 1.0);

  CHECK(reciprocal_rank({"x", "u4"}, rel) == 0.5);
  CHECK(reciprocal_rank({"x", "y"}, rel) == 0.0);

  CHECK(ndcg_at_k({"a", "b"}, {"a"}, 1) == 1.0);
  CHECK(ndcg_at_k({"b", "a", "c"}, {"a"}, 3) ==
        doctest::Approx(1.0 / (std::log2(3.0))).epsilon(1e-12));

  CHECK_THROWS_AS(recall_at_k(ranking, {}, 2), EmptyRelevant);
  CHECK_THROWS_AS(reciprocal_rank(ranking, {}), EmptyRelevant);
  CHECK_THROWS_AS(ndcg_at_k(ranking, {}, 2), EmptyRelevant);
  CHECK_THROWS_AS(recall_at_k(ranking, rel, 0), InputError);
}

TEST_CASE("metrics match brute force on 1000 random instances") {
  Rng rng(1234);
  for (int i = 0; i < 1000; ++i) {
    RandomInstance inst = random_instance(rng);
    const double recall = recall_at_k(inst.ranking, inst.relevant, inst.k);
    const double rr = reciprocal_rank(inst.ranking, inst.relevant);
    const double ndcg = ndcg_at_k(inst.ranking, inst.relevant, inst.k);
    CHECK(recall == recall_bruteforce(inst.ranking, inst.relevant, inst.k));
    CHECK(rr == rr_bruteforce(inst.ranking, inst.relevant));
    CHECK(std::fabs(ndcg - ndcg_bruteforce(inst.ranking, inst.relevant, inst.k)) <= 1e-12);
    // every metric lives in [0,1]
    for (double v : {recall, rr, ndcg}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("ndcg is 1 exactly when relevant fills the top") {
  RelevantSet rel{"a", "b"};
  CHECK(ndcg_at_k({"a", "b", "c"}, rel, 3) == doctest::Approx(1.0));
  CHECK(ndcg_at_k({"a", "c", "b"}, rel, 3) < 1.0);
  // k below |relevant|: ideal prefix is the top-k
  CHECK(ndcg_at_k({"a", "b", "c"}, rel, 1) == doctest::Approx(1.0));
}

TEST_CASE("report serialization carries every block") {
  EvalReport rep;
  rep.n_cases = 3;
  rep.coverage = 1.0;
  rep.pipeline.recall_at[10] = 0.61;
  rep.pipeline.ndcg_at[10] = 0.5;
  rep.pipeline.mrr = 0.42;
  rep.random_baseline.recall_at[10] = 0.02;
  rep.random_baseline.ndcg_at[10] = 0.01;
  rep.random_baseline.mrr = 0.03;
  rep.popularity_baseline.recall_at[10] = 0.2;
  rep.popularity_baseline.ndcg_at[10] = 0.1;
  rep.popularity_baseline.mrr = 0.15;

  std::ostringstream out;
  write_report(rep, out);
  const std::string text = out.str();
  CHECK(text.find("n_cases = 3\n") != std::string::npos);
  CHECK(text.find("recall@10 = 0.610000\n") != std::string::npos);
  CHECK(text.find("mrr = 0.420000\n") != std::string::npos);
  CHECK(text.find("baseline_random_recall@10 = 0.020000\n") != std::string::npos);
  CHECK(text.find("baseline_popularity_mrr = 0.150000\n") != std::string::npos);
}

TEST_CASE("activity report and csv formats") {
  EventLog log;
  log.events.push_back({EventType::Asked, "u1", "q1", "", 100});
  log.events.push_back({EventType::Answered, "u2", "q1", "", 160});
  ActivityReport rep = characterize(log);

  std::ostringstream out;
  write_activity_report(rep, out);
  const std::string text = out.str();
  CHECK(text.find("questions = 1\n") != std::string::npos);
  CHECK(text.find("time_to_first_answer_p50 = 60\n") != std::string::npos);
  CHECK(text.find("gini_answers = ") != std::string::npos);

  std::ostringstream hist;
  write_answers_histogram_csv(rep, hist);
  CHECK(hist.str() == "answers,questions\n1,1\n");

  std::ostringstream ttfa;
  write_ttfa_csv(rep, ttfa);
  CHECK(ttfa.str() == "question,seconds\nq1,60\n");
}

}  // TEST_SUITE
