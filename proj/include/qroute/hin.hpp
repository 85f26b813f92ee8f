#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qroute/corpus.hpp"
#include "qroute/rng.hpp"

namespace qroute {

using NodeKind = EntityKind;
inline constexpr std::size_t kNumKinds = 3;

enum class Relation : std::uint8_t { Asked = 0, Answered = 1, Tagged = 2, Interested = 3 };
inline constexpr std::size_t kNumRelations = 4;

// Asked/Answered join User-Question, Tagged joins Question-Crop,
// Interested joins User-Crop. All relations are undirected.
std::pair<NodeKind, NodeKind> relation_endpoints(Relation r);
NodeKind other_endpoint(Relation r, NodeKind from);  // throws InputError off-schema
const char* relation_name(Relation r);
char kind_letter(NodeKind k);  // u / q / c

// O(1) sampler for a fixed categorical distribution (Vose construction).
// Index i is drawn with probability weight_i / sum(weights) up to the
// documented 1e-12 per-entry construction error.
struct AliasTable {
  std::vector<double> prob;
  std::vector<std::uint32_t> alias;

  std::size_t size() const { return prob.size(); }
  bool empty() const { return prob.empty(); }

  // Two generator draws per sample.
  std::uint32_t sample(Rng& rng) const {
    const std::size_t n = prob.size();
    auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    if (i >= n) i = n - 1;
    return rng.uniform01() < prob[i] ? static_cast<std::uint32_t>(i) : alias[i];
  }
};

AliasTable alias_build(const std::vector<double>& weights);

struct AdjList {
  std::vector<std::uint32_t> nbr;  // flat node ids
  std::vector<double> weight;      // strictly positive, matches nbr
  AliasTable alias;                // built when nbr is non-empty
  bool empty() const { return nbr.empty(); }
  std::size_t size() const { return nbr.size(); }
};

// Typed weighted graph over the training events. Nodes get dense per-kind
// indices in order of first appearance; flat ids lay the kinds out as
// [users][questions][crops]. Immutable once built.
class Hin {
 public:
  static Hin build(const EventLog& train);

  std::size_t node_count() const { return adj_.size(); }
  std::size_t count(NodeKind k) const { return ids_[static_cast<std::size_t>(k)].size(); }

  NodeKind kind_of(std::uint32_t node) const;
  std::uint32_t kind_index(std::uint32_t node) const;
  std::uint32_t flat(NodeKind k, std::uint32_t kind_idx) const;
  const std::string& id_of(std::uint32_t node) const;
  std::optional<std::uint32_t> find(NodeKind k, std::string_view id) const;

  const AdjList& neighbors(std::uint32_t node, Relation r) const {
    return adj_[node][static_cast<std::size_t>(r)];
  }

  // nullopt iff the (node, relation) list is empty.
  std::optional<std::uint32_t> sample_neighbor(std::uint32_t node, Relation r, Rng& rng) const {
    const AdjList& list = neighbors(node, r);
    if (list.empty()) return std::nullopt;
    return list.nbr[list.alias.sample(rng)];
  }

 private:
  std::uint32_t intern(NodeKind k, const std::string& id);

  std::array<std::vector<std::string>, kNumKinds> ids_;
  std::array<std::unordered_map<std::string, std::uint32_t>, kNumKinds> index_;
  std::array<std::uint32_t, kNumKinds + 1> offset_{};  // flat block starts
  std::vector<std::array<AdjList, kNumRelations>> adj_;
};

}  // namespace qroute
