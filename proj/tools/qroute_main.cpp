// qroute: question routing over a heterogeneous user/question/crop graph.
// Subcommands cover the full offline pipeline: synth -> stats -> train ->
// evaluate / recommend. One --seed pins every stage; workers=1 runs are
// byte-reproducible.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qroute/pipeline.hpp"

using namespace qroute;

namespace {

struct SeedFlags {
  std::uint64_t global = 42;
  CLI::Option* global_opt = nullptr;
  std::uint64_t stage_val[6] = {};
  CLI::Option* stage_opt[6] = {};

  void add_global(CLI::App* cmd) {
    global_opt = cmd->add_option("--seed", global,
                                 "global seed; overrides stage seeds by mixing with the stage "
                                 "ordinal");
  }
  void add_stage(CLI::App* cmd, Stage st, const std::string& flag) {
    stage_opt[static_cast<std::size_t>(st)] =
        cmd->add_option(flag, stage_val[static_cast<std::size_t>(st)],
                        "stage seed (ignored when --seed is given)");
  }
  std::uint64_t get(Stage st) const {
    const auto i = static_cast<std::size_t>(st);
    if (stage_opt[i] && stage_opt[i]->count() > 0 && !(global_opt && global_opt->count() > 0))
      return stage_val[i];
    return stage_seed(global, st);
  }
};

EventLog read_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_events(in);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  fn(out);
}

void print_times(const StageTimes& t) {
  std::fprintf(stderr, "stage split: %.2f s\n", t.split_s);
  std::fprintf(stderr, "stage hin: %.2f s\n", t.hin_s);
  std::fprintf(stderr, "stage walks: %.2f s\n", t.walk_s);
  std::fprintf(stderr, "stage sgns: %.2f s\n", t.sgns_s);
  std::fprintf(stderr, "stage pairs: %.2f s\n", t.pairs_s);
  std::fprintf(stderr, "stage scorer: %.2f s\n", t.scorer_s);
}

std::vector<std::string> split_list(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const std::string& a : args) {
    std::string cur;
    for (char ch : a) {
      if (ch == ';' || ch == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) out.push_back(cur);
  }
  // deduplicate, first occurrence wins
  std::vector<std::string> dedup;
  for (const std::string& s : out)
    if (std::find(dedup.begin(), dedup.end(), s) == dedup.end()) dedup.push_back(s);
  return dedup;
}

struct SplitFlags {
  double fraction = 0.9;
  std::int64_t time = 0;
  CLI::Option* time_opt = nullptr;

  void add(CLI::App* cmd) {
    auto* f = cmd->add_option("--cutoff-fraction", fraction,
                              "train on the earliest fraction of questions")
                  ->capture_default_str();
    time_opt = cmd->add_option("--cutoff-time", time, "train on events up to this unix time");
    time_opt->excludes(f);
  }
  SplitSpec spec() const {
    if (time_opt && time_opt->count() > 0) return SplitSpec::at_time(time);
    return SplitSpec::fraction(fraction);
  }
};

int cmd_synth(const SynthConfig& cfg, const std::string& out_path) {
  EventLog log = synth_generate(cfg);
  write_file(out_path, [&](std::ostream& out) { write_events(log, out); });

  std::size_t by_type[4] = {};
  for (const Event& e : log.events) ++by_type[static_cast<std::size_t>(e.etype)];
  std::printf("users=%u questions=%u crops=%u asked=%zu answered=%zu tagged=%zu interested=%zu\n",
              cfg.n_users, cfg.n_questions, cfg.n_crops,
              by_type[0], by_type[1], by_type[2], by_type[3]);
  std::printf("wrote %zu events to %s\n", log.events.size(), out_path.c_str());
  return 0;
}

int cmd_stats(const std::string& input, const std::string& outdir) {
  EventLog log = read_events_file(input);
  ActivityReport rep = characterize(log);
  write_activity_report(rep, std::cout);
  write_file(outdir + "/answers_per_question.csv",
             [&](std::ostream& out) { write_answers_histogram_csv(rep, out); });
  write_file(outdir + "/time_to_first_answer.csv",
             [&](std::ostream& out) { write_ttfa_csv(rep, out); });
  return 0;
}

struct TrainArgs {
  std::string input, emb_out = "embeddings.txt", scorer_out = "scorer.txt", walk_dump;
  bool dump_context = false;
  PipelineConfig cfg;
};

int cmd_train(const TrainArgs& a) {
  EventLog log = read_events_file(a.input);
  TrainOutput trained = run_training(log, a.cfg);
  print_times(trained.times);

  write_file(a.emb_out, [&](std::ostream& out) {
    save_embeddings(trained.emb, trained.hin, out, a.dump_context);
  });
  write_file(a.scorer_out, [&](std::ostream& out) { save_scorer(trained.scorer, out); });
  if (!a.walk_dump.empty())
    write_file(a.walk_dump, [&](std::ostream& out) { write_walks(trained.walks, trained.hin, out); });
  std::fprintf(stderr, "embeddings: %zu nodes x %u dims -> %s\n", trained.emb.vocab_size(),
               trained.emb.dim, a.emb_out.c_str());
  return 0;
}

struct EvalArgs {
  std::string input, emb, scorer, out = "-", dump_cases;
  std::vector<std::size_t> ks = {1, 5, 10};
  SplitSpec split;
  std::uint64_t eval_seed = 0;
};

int cmd_evaluate(const EvalArgs& a) {
  EventLog log = read_events_file(a.input);
  SplitResult split = temporal_split(log, a.split);
  Hin hin = Hin::build(split.train);

  std::ifstream emb_in(a.emb);
  if (!emb_in) throw InputError("cannot open " + a.emb);
  EmbeddingTable emb = load_embeddings(emb_in, hin);
  std::ifstream sc_in(a.scorer);
  if (!sc_in) throw InputError("cannot open " + a.scorer);
  Scorer scorer = load_scorer(sc_in);
  if (scorer.weights.size() != std::size_t(emb.dim) + 2)
    throw DimensionMismatch("scorer expects dim " + std::to_string(scorer.dim) +
                            ", embeddings have dim " + std::to_string(emb.dim));

  std::vector<Candidate> candidates = candidate_pool(split.train, hin);
  EvalReport rep = evaluate(split.test, emb, scorer, candidates, a.ks, a.eval_seed, hin);

  if (a.out == "-")
    write_report(rep, std::cout);
  else
    write_file(a.out, [&](std::ostream& out) { write_report(rep, out); });
  if (!a.dump_cases.empty())
    write_file(a.dump_cases, [&](std::ostream& out) { write_test_cases(split.test, out); });
  return 0;
}

struct RecommendArgs {
  std::string input, emb, scorer, question = "new-question", asker;
  std::vector<std::string> crops;
  std::size_t top_k = 10;
  SplitSpec split;
};

int cmd_recommend(const RecommendArgs& a) {
  EventLog log = read_events_file(a.input);
  SplitResult split = temporal_split(log, a.split);
  Hin hin = Hin::build(split.train);

  std::ifstream emb_in(a.emb);
  if (!emb_in) throw InputError("cannot open " + a.emb);
  EmbeddingTable emb = load_embeddings(emb_in, hin);
  std::ifstream sc_in(a.scorer);
  if (!sc_in) throw InputError("cannot open " + a.scorer);
  Scorer scorer = load_scorer(sc_in);
  if (scorer.weights.size() != std::size_t(emb.dim) + 2)
    throw DimensionMismatch("scorer expects dim " + std::to_string(scorer.dim) +
                            ", embeddings have dim " + std::to_string(emb.dim));

  QuestionProbe probe{a.question, a.asker, split_list(a.crops)};
  std::vector<Candidate> candidates = candidate_pool(split.train, hin);
  RankedList ranked = recommend(probe, emb, scorer, candidates, a.top_k, hin);
  if (ranked.cold_start)
    std::fprintf(stderr, "cold start: no vector for the probe, ranking by train answer count\n");
  write_ranked_csv(ranked, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"question routing over a user/question/crop interaction graph"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a planted-community event log");
  SynthConfig synth_cfg;
  std::string synth_out = "events.csv";
  SeedFlags synth_seeds;
  synth->add_option("--out", synth_out, "output event CSV")->capture_default_str();
  synth->add_option("--clusters", synth_cfg.n_clusters)->capture_default_str();
  synth->add_option("--users", synth_cfg.n_users)->capture_default_str();
  synth->add_option("--crops", synth_cfg.n_crops)->capture_default_str();
  synth->add_option("--questions", synth_cfg.n_questions)->capture_default_str();
  synth->add_option("--answers-mean", synth_cfg.answers_per_question_mean)->capture_default_str();
  synth->add_option("--noise", synth_cfg.cross_cluster_noise)->capture_default_str();
  synth->add_option("--span", synth_cfg.time_span_seconds, "time span in seconds")
      ->capture_default_str();
  synth_seeds.add_global(synth);
  synth_seeds.add_stage(synth, Stage::Synth, "--synth-seed");

  // stats
  auto* stats = app.add_subcommand("stats", "characterize an event log");
  std::string stats_input, stats_outdir = ".";
  stats->add_option("--input", stats_input, "event CSV")->required();
  stats->add_option("--outdir", stats_outdir, "directory for the histogram CSVs")
      ->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "split, embed and fit the answer scorer");
  TrainArgs train_args;
  SplitFlags train_split;
  SeedFlags train_seeds;
  bool global_negatives = false;
  train->add_option("--input", train_args.input, "event CSV")->required();
  train->add_option("--emb-out", train_args.emb_out)->capture_default_str();
  train->add_option("--scorer-out", train_args.scorer_out)->capture_default_str();
  train->add_option("--walk-dump", train_args.walk_dump, "optional walk corpus dump");
  train->add_flag("--dump-context", train_args.dump_context,
                  "append the context table to the embedding file");
  train_split.add(train);
  train->add_option("--walks-per-node", train_args.cfg.walk.walks_per_node)
      ->capture_default_str();
  train->add_option("--walk-length", train_args.cfg.walk.walk_length)->capture_default_str();
  train->add_option("--dim", train_args.cfg.sgns.dim)->capture_default_str();
  train->add_option("--window", train_args.cfg.sgns.window)->capture_default_str();
  train->add_option("--negatives", train_args.cfg.sgns.negatives)->capture_default_str();
  train->add_option("--lr0", train_args.cfg.sgns.lr0)->capture_default_str();
  train->add_option("--epochs", train_args.cfg.sgns.epochs)->capture_default_str();
  train->add_option("--noise-power", train_args.cfg.sgns.noise_power)->capture_default_str();
  train->add_flag("--global-negatives", global_negatives,
                  "sample negatives from all kinds instead of the context kind");
  train->add_option("--workers", train_args.cfg.sgns.workers,
                    "lock-free trainer threads (>1 is nondeterministic)")
      ->capture_default_str();
  train->add_option("--neg-per-pos", train_args.cfg.neg_per_pos)->capture_default_str();
  train->add_option("--scorer-epochs", train_args.cfg.scorer.epochs)->capture_default_str();
  train->add_option("--scorer-lr", train_args.cfg.scorer.lr)->capture_default_str();
  train->add_option("--l2", train_args.cfg.scorer.l2)->capture_default_str();
  train_seeds.add_global(train);
  train_seeds.add_stage(train, Stage::Walk, "--walk-seed");
  train_seeds.add_stage(train, Stage::Sgns, "--sgns-seed");
  train_seeds.add_stage(train, Stage::Pairs, "--pairs-seed");
  train_seeds.add_stage(train, Stage::Scorer, "--scorer-seed");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "offline ranking metrics with baselines");
  EvalArgs eval_args;
  SplitFlags eval_split;
  SeedFlags eval_seeds;
  evaluate->add_option("--input", eval_args.input, "event CSV")->required();
  evaluate->add_option("--emb", eval_args.emb, "embedding file from train")->required();
  evaluate->add_option("--scorer", eval_args.scorer, "scorer file from train")->required();
  evaluate->add_option("--ks", eval_args.ks, "cutoffs for recall@k / ndcg@k")
      ->capture_default_str();
  evaluate->add_option("--out", eval_args.out, "report path, - for stdout")
      ->capture_default_str();
  evaluate->add_option("--dump-test-cases", eval_args.dump_cases, "test case export CSV");
  eval_split.add(evaluate);
  eval_seeds.add_global(evaluate);
  eval_seeds.add_stage(evaluate, Stage::Eval, "--eval-seed");

  // recommend
  auto* rec = app.add_subcommand("recommend", "rank answerers for one question probe");
  RecommendArgs rec_args;
  SplitFlags rec_split;
  rec->add_option("--input", rec_args.input, "event CSV")->required();
  rec->add_option("--emb", rec_args.emb)->required();
  rec->add_option("--scorer", rec_args.scorer)->required();
  rec->add_option("--question", rec_args.question, "question id (may be new)")
      ->capture_default_str();
  rec->add_option("--asker", rec_args.asker, "asker user id")->required();
  rec->add_option("--crops", rec_args.crops, "crop ids, ;-joined or repeated");
  rec->add_option("--top-k", rec_args.top_k)->check(CLI::PositiveNumber)->capture_default_str();
  rec_split.add(rec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      synth_cfg.seed = synth_seeds.get(Stage::Synth);
      return cmd_synth(synth_cfg, synth_out);
    }
    if (*stats) return cmd_stats(stats_input, stats_outdir);
    if (*train) {
      train_args.cfg.split = train_split.spec();
      train_args.cfg.sgns.kind_aware_negatives = !global_negatives;
      train_args.cfg.walk.seed = train_seeds.get(Stage::Walk);
      train_args.cfg.sgns.seed = train_seeds.get(Stage::Sgns);
      train_args.cfg.pairs_seed = train_seeds.get(Stage::Pairs);
      train_args.cfg.scorer.seed = train_seeds.get(Stage::Scorer);
      return cmd_train(train_args);
    }
    if (*evaluate) {
      eval_args.split = eval_split.spec();
      eval_args.eval_seed = eval_seeds.get(Stage::Eval);
      return cmd_evaluate(eval_args);
    }
    if (*rec) {
      rec_args.split = rec_split.spec();
      return cmd_recommend(rec_args);
    }
  } catch (const EmptyResultError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
