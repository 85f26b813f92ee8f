#include "qroute/hin.hpp"

#include <algorithm>
#include <cmath>

namespace qroute {

std::pair<NodeKind, NodeKind> relation_endpoints(Relation r) {
  switch (r) {
    case Relation::Asked:
    case Relation::Answered: return {NodeKind::User, NodeKind::Question};
    case Relation::Tagged: return {NodeKind::Question, NodeKind::Crop};
    case Relation::Interested: return {NodeKind::User, NodeKind::Crop};
  }
  throw InputError("bad relation");
}

NodeKind other_endpoint(Relation r, NodeKind from) {
  auto [a, b] = relation_endpoints(r);
  if (from == a) return b;
  if (from == b) return a;
  throw InputError(std::string(relation_name(r)) + " does not touch that node kind");
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Asked: return "asked";
    case Relation::Answered: return "answered";
    case Relation::Tagged: return "tagged";
    case Relation::Interested: return "interested";
  }
  return "?";
}

char kind_letter(NodeKind k) {
  switch (k) {
    case NodeKind::User: return 'u';
    case NodeKind::Question: return 'q';
    case NodeKind::Crop: return 'c';
  }
  return '?';
}

AliasTable alias_build(const std::vector<double>& weights) {
  if (weights.empty()) throw EmptyWeights();
  const std::size_t n = weights.size();
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(weights[i]) || !(weights[i] > 0.0)) throw NonPositiveWeight(i);
    total += weights[i];
  }

  // Vose pairing in extended precision so reconstruction stays inside the
  // 1e-12 per-entry bound even for large tables.
  std::vector<long double> scaled(n);
  for (std::size_t i = 0; i < n; ++i)
    scaled[i] = static_cast<long double>(weights[i]) * static_cast<long double>(n) / total;

  AliasTable t;
  t.prob.assign(n, 1.0);
  t.alias.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.alias[i] = static_cast<std::uint32_t>(i);

  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i)
    (scaled[i] < 1.0L ? small : large).push_back(static_cast<std::uint32_t>(i));

  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    const std::uint32_t l = large.back();
    small.pop_back();
    large.pop_back();
    t.prob[s] = static_cast<double>(scaled[s]);
    t.alias[s] = l;
    scaled[l] -= 1.0L - scaled[s];
    (scaled[l] < 1.0L ? small : large).push_back(l);
  }
  // Leftovers are within rounding of 1 and keep prob=1, alias=self.
  return t;
}

std::uint32_t Hin::intern(NodeKind k, const std::string& id) {
  auto& idx = index_[static_cast<std::size_t>(k)];
  auto it = idx.find(id);
  if (it != idx.end()) return it->second;
  auto& ids = ids_[static_cast<std::size_t>(k)];
  const auto i = static_cast<std::uint32_t>(ids.size());
  ids.push_back(id);
  idx.emplace(id, i);
  return i;
}

NodeKind Hin::kind_of(std::uint32_t node) const {
  for (std::size_t k = 0; k < kNumKinds; ++k)
    if (node < offset_[k + 1]) return static_cast<NodeKind>(k);
  throw InputError("node id out of range");
}

std::uint32_t Hin::kind_index(std::uint32_t node) const {
  return node - offset_[static_cast<std::size_t>(kind_of(node))];
}

std::uint32_t Hin::flat(NodeKind k, std::uint32_t kind_idx) const {
  return offset_[static_cast<std::size_t>(k)] + kind_idx;
}

const std::string& Hin::id_of(std::uint32_t node) const {
  const NodeKind k = kind_of(node);
  return ids_[static_cast<std::size_t>(k)][kind_index(node)];
}

std::optional<std::uint32_t> Hin::find(NodeKind k, std::string_view id) const {
  const auto& idx = index_[static_cast<std::size_t>(k)];
  auto it = idx.find(std::string(id));
  if (it == idx.end()) return std::nullopt;
  return flat(k, it->second);
}

Hin Hin::build(const EventLog& train) {
  Hin hin;

  // First pass: dense per-kind ids in order of first appearance. Questions
  // referenced only by orphan answers or tags become nodes too.
  for (const Event& e : train.events) {
    if (!e.user.empty()) hin.intern(NodeKind::User, e.user);
    if (!e.question.empty()) hin.intern(NodeKind::Question, e.question);
    if (!e.crop.empty()) hin.intern(NodeKind::Crop, e.crop);
  }
  hin.offset_[0] = 0;
  for (std::size_t k = 0; k < kNumKinds; ++k)
    hin.offset_[k + 1] = hin.offset_[k] + static_cast<std::uint32_t>(hin.ids_[k].size());
  hin.adj_.resize(hin.offset_[kNumKinds]);

  // Second pass: accumulate multiplicity per (relation, endpoints). Edge
  // order is first occurrence so the layout is a pure function of the log.
  struct EdgeKey {
    std::uint64_t packed;
    bool operator==(const EdgeKey&) const = default;
  };
  std::array<std::unordered_map<std::uint64_t, double>, kNumRelations> weight;
  std::array<std::vector<std::uint64_t>, kNumRelations> order;

  auto add_edge = [&](Relation r, std::uint32_t a, std::uint32_t b) {
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    auto& map = weight[static_cast<std::size_t>(r)];
    auto [it, fresh] = map.emplace(key, 1.0);
    if (!fresh)
      it->second += 1.0;
    else
      order[static_cast<std::size_t>(r)].push_back(key);
  };

  for (const Event& e : train.events) {
    switch (e.etype) {
      case EventType::Asked:
        add_edge(Relation::Asked, *hin.find(NodeKind::User, e.user),
                 *hin.find(NodeKind::Question, e.question));
        break;
      case EventType::Answered:
        add_edge(Relation::Answered, *hin.find(NodeKind::User, e.user),
                 *hin.find(NodeKind::Question, e.question));
        break;
      case EventType::Tagged:
        add_edge(Relation::Tagged, *hin.find(NodeKind::Question, e.question),
                 *hin.find(NodeKind::Crop, e.crop));
        break;
      case EventType::Interested:
        add_edge(Relation::Interested, *hin.find(NodeKind::User, e.user),
                 *hin.find(NodeKind::Crop, e.crop));
        break;
    }
  }

  for (std::size_t r = 0; r < kNumRelations; ++r) {
    for (const std::uint64_t key : order[r]) {
      const auto a = static_cast<std::uint32_t>(key >> 32);
      const auto b = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
      const double w = weight[r].at(key);
      hin.adj_[a][r].nbr.push_back(b);
      hin.adj_[a][r].weight.push_back(w);
      hin.adj_[b][r].nbr.push_back(a);
      hin.adj_[b][r].weight.push_back(w);
    }
  }
  for (auto& per_node : hin.adj_)
    for (auto& list : per_node)
      if (!list.empty()) list.alias = alias_build(list.weight);
  return hin;
}

}  // namespace qroute
