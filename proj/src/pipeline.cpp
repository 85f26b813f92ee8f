#include "qroute/pipeline.hpp"

#include <chrono>

namespace qroute {

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TrainOutput run_training(const EventLog& log, const PipelineConfig& cfg,
                         const EpochHook& on_epoch) {
  TrainOutput out;
  Timer timer;

  out.split = temporal_split(log, cfg.split);
  out.times.split_s = timer.lap();

  out.hin = Hin::build(out.split.train);
  out.times.hin_s = timer.lap();

  out.walks = generate_walks(out.hin, cfg.walk);
  out.times.walk_s = timer.lap();

  out.emb = train(out.walks, out.hin, cfg.sgns, on_epoch);
  out.times.sgns_s = timer.lap();

  LabeledPairs pairs =
      build_training_pairs(out.split.train, out.hin, out.emb, cfg.neg_per_pos, cfg.pairs_seed);
  out.times.pairs_s = timer.lap();

  out.scorer = train_scorer(pairs, cfg.scorer);
  out.times.scorer_s = timer.lap();
  return out;
}

EvalReport run_evaluation(const TrainOutput& trained, const PipelineConfig& cfg) {
  const std::vector<Candidate> candidates = candidate_pool(trained.split.train, trained.hin);
  return evaluate(trained.split.test, trained.emb, trained.scorer, candidates, cfg.eval_ks,
                  cfg.eval_seed, trained.hin);
}

}  // namespace qroute
