#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qroute/hin.hpp"
#include "qroute/walker.hpp"

namespace qroute {

struct TrainConfig {
  std::uint32_t dim = 128;
  std::uint32_t window = 5;
  std::uint32_t negatives = 5;
  double lr0 = 0.025;
  std::uint32_t epochs = 5;
  double noise_power = 0.75;
  bool kind_aware_negatives = true;
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;
};

// Center and context vectors over the Hin's flat id space. Rows exist only
// for nodes that occur in the walk corpus (has[node] != 0); the center table
// is the published embedding.
struct EmbeddingTable {
  std::uint32_t dim = 0;
  std::size_t n_nodes = 0;
  std::vector<std::uint8_t> has;
  std::vector<double> center;   // n_nodes x dim
  std::vector<double> context;  // n_nodes x dim

  bool has_vector(std::uint32_t node) const { return has[node] != 0; }
  double* center_row(std::uint32_t node) { return center.data() + std::size_t(node) * dim; }
  const double* center_row(std::uint32_t node) const {
    return center.data() + std::size_t(node) * dim;
  }
  double* context_row(std::uint32_t node) { return context.data() + std::size_t(node) * dim; }
  const double* context_row(std::uint32_t node) const {
    return context.data() + std::size_t(node) * dim;
  }
  std::size_t vocab_size() const;
};

struct Vocab {
  std::vector<std::uint64_t> freq;  // by flat node id
  std::uint64_t total = 0;
};

// Noise distributions with probability proportional to freq^noise_power,
// one per node kind plus a global one over the whole vocabulary.
struct NoiseTable {
  struct Table {
    std::vector<std::uint32_t> nodes;
    AliasTable alias;
    bool empty() const { return nodes.empty(); }
  };
  std::array<Table, kNumKinds> per_kind;
  Table global;

  // Draws from the context kind's table (kind-aware) or the global one.
  std::uint32_t sample(NodeKind context_kind, bool kind_aware, Rng& rng) const {
    const Table& t = kind_aware ? per_kind[static_cast<std::size_t>(context_kind)] : global;
    return t.nodes[t.alias.sample(rng)];
  }
};

// Occurrence counts over all walks; no minimum-count pruning.
std::pair<Vocab, NoiseTable> build_vocab(const WalkCorpus& corpus, const Hin& hin,
                                         double noise_power);

// loss = -log s(u.v) - sum_j log s(-u.n_j), s(x) = 1/(1+e^-x), with the
// s argument clamped to [-30, 30].
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::vector<double>> negatives);

struct PairGrad {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

// Analytic gradients of sgns_pair_loss at the given point.
PairGrad sgns_pair_grad(std::span<const double> center, std::span<const double> context,
                        std::span<const std::vector<double>> negatives);

struct TrainStats {
  std::uint64_t pairs = 0;
  std::uint64_t negatives_drawn = 0;
  std::uint64_t negatives_skipped = 0;  // 10 collisions in a row
  std::uint64_t kind_mismatches = 0;    // negatives whose kind != context kind
};

// Called after each epoch with the epoch number (1-based) and the tables so
// far; used for loss probes.
using EpochHook = std::function<void(std::uint32_t, const EmbeddingTable&)>;

// SGD over (center, context) pairs from every walk, window radius drawn
// uniformly from {1..window} per center position, `negatives` noise draws
// per pair. Deterministic for workers == 1; more workers run lock-free on
// disjoint walk ranges and may interleave updates.
EmbeddingTable train(const WalkCorpus& corpus, const Hin& hin, const TrainConfig& cfg,
                     const EpochHook& on_epoch = nullptr, TrainStats* stats = nullptr);

// Text format: `N d` header, then one `k:index v1 .. vd` line per vocabulary
// node (center vectors). With context, a `#context` separator and the same
// rows from the context table follow.
void save_embeddings(const EmbeddingTable& emb, const Hin& hin, std::ostream& out,
                     bool dump_context = false);
EmbeddingTable load_embeddings(std::istream& in, const Hin& hin);

}  // namespace qroute
