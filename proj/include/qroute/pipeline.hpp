#pragma once

#include <cstdint>
#include <vector>

#include "qroute/corpus.hpp"
#include "qroute/hin.hpp"
#include "qroute/metrics.hpp"
#include "qroute/router.hpp"
#include "qroute/sgns.hpp"
#include "qroute/walker.hpp"

namespace qroute {

// Stage ordinals for deriving per-stage seeds from one global seed.
enum class Stage : std::uint64_t { Synth = 0, Walk = 1, Sgns = 2, Pairs = 3, Scorer = 4, Eval = 5 };

inline std::uint64_t stage_seed(std::uint64_t global_seed, Stage stage) {
  return mix_seed(global_seed, static_cast<std::uint64_t>(stage));
}

struct PipelineConfig {
  SplitSpec split = SplitSpec::fraction(0.9);
  WalkConfig walk{default_metapaths()};
  TrainConfig sgns;
  std::uint32_t neg_per_pos = 5;
  ScorerConfig scorer;
  std::uint64_t pairs_seed = 1;
  std::uint64_t eval_seed = 1;
  std::vector<std::size_t> eval_ks = {1, 5, 10};

  // Repoints every stage seed at mixes of one global seed.
  void apply_global_seed(std::uint64_t seed) {
    walk.seed = stage_seed(seed, Stage::Walk);
    sgns.seed = stage_seed(seed, Stage::Sgns);
    pairs_seed = stage_seed(seed, Stage::Pairs);
    scorer.seed = stage_seed(seed, Stage::Scorer);
    eval_seed = stage_seed(seed, Stage::Eval);
  }
};

struct StageTimes {
  double split_s = 0, hin_s = 0, walk_s = 0, sgns_s = 0, pairs_s = 0, scorer_s = 0;
};

struct TrainOutput {
  SplitResult split;
  Hin hin;
  WalkCorpus walks;
  EmbeddingTable emb;
  Scorer scorer;
  StageTimes times;
};

// split -> hin -> walks -> sgns -> pairs -> scorer.
TrainOutput run_training(const EventLog& log, const PipelineConfig& cfg,
                         const EpochHook& on_epoch = nullptr);

// Evaluates a trained run against its own held-out test cases.
EvalReport run_evaluation(const TrainOutput& trained, const PipelineConfig& cfg);

}  // namespace qroute
