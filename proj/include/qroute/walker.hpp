#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qroute/hin.hpp"

namespace qroute {

struct MetapathStep {
  Relation relation;
  NodeKind target_kind;
};

// Cyclic typed walk pattern: steps chain kind-to-kind through their
// relations and the last step returns to start_kind.
struct Metapath {
  NodeKind start_kind;
  std::vector<MetapathStep> steps;
  void validate() const;  // throws InputError
};

// The walk schemes composed from the four measured relations:
//   M1  U -answered- Q -answered- U
//   M2  U -answered- Q -tagged- C -tagged- Q -answered- U
//   M3  U -interested- C -interested- U
//   M4  Q -asked- U -answered- Q
std::vector<Metapath> default_metapaths();

struct WalkConfig {
  std::vector<Metapath> metapaths;  // non-empty
  std::uint32_t walks_per_node = 10;
  std::uint32_t walk_length = 40;  // node count per walk, >= 2
  std::uint64_t seed = 1;
};

struct WalkCorpus {
  std::vector<std::vector<std::uint32_t>> walks;  // flat node ids
  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& w : walks) n += w.size();
    return n;
  }
};

// Metapath-guided weighted walks. A walk that hits a node with no neighbor
// under the prescribed relation stops early; length-1 stubs are dropped.
// Deterministic: each walk runs on its own seed derived from
// (cfg.seed, metapath index, start node, repetition).
WalkCorpus generate_walks(const Hin& hin, const WalkConfig& cfg);

// One walk per line, space-separated `k:index` tokens with k in {u,q,c}.
void write_walks(const WalkCorpus& corpus, const Hin& hin, std::ostream& out);

}  // namespace qroute
