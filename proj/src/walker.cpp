#include "qroute/walker.hpp"

#include <ostream>

namespace qroute {

void Metapath::validate() const {
  if (steps.empty()) throw InputError("metapath needs at least one step");
  NodeKind at = start_kind;
  for (const MetapathStep& s : steps) {
    if (other_endpoint(s.relation, at) != s.target_kind)
      throw InputError("metapath step does not chain: " + std::string(relation_name(s.relation)) +
                       " cannot reach the declared target kind");
    at = s.target_kind;
  }
  if (at != start_kind) throw InputError("metapath must be cyclic (end where it starts)");
}

std::vector<Metapath> default_metapaths() {
  using R = Relation;
  using K = NodeKind;
  std::vector<Metapath> paths;
  paths.push_back({K::User, {{R::Answered, K::Question}, {R::Answered, K::User}}});
  paths.push_back({K::User,
                   {{R::Answered, K::Question},
                    {R::Tagged, K::Crop},
                    {R::Tagged, K::Question},
                    {R::Answered, K::User}}});
  paths.push_back({K::User, {{R::Interested, K::Crop}, {R::Interested, K::User}}});
  paths.push_back({K::Question, {{R::Asked, K::User}, {R::Answered, K::Question}}});
  return paths;
}

WalkCorpus generate_walks(const Hin& hin, const WalkConfig& cfg) {
  if (cfg.metapaths.empty()) throw InputError("walk config needs at least one metapath");
  if (cfg.walks_per_node == 0) throw InputError("walks_per_node must be positive");
  if (cfg.walk_length < 2) throw InputError("walk_length must be at least 2");
  for (const Metapath& m : cfg.metapaths) m.validate();

  WalkCorpus corpus;
  for (std::size_t mi = 0; mi < cfg.metapaths.size(); ++mi) {
    const Metapath& m = cfg.metapaths[mi];
    const auto n_starts = static_cast<std::uint32_t>(hin.count(m.start_kind));
    if (n_starts == 0)
      throw NoValidStartNodes("no nodes of the start kind for metapath " + std::to_string(mi));

    for (std::uint32_t s = 0; s < n_starts; ++s) {
      const std::uint32_t start = hin.flat(m.start_kind, s);
      for (std::uint32_t rep = 0; rep < cfg.walks_per_node; ++rep) {
        Rng rng(mix_seed(mix_seed(mix_seed(cfg.seed, mi), start), rep));
        std::vector<std::uint32_t> walk{start};
        walk.reserve(cfg.walk_length);
        std::uint32_t cur = start;
        for (std::size_t pos = 0; walk.size() < cfg.walk_length; ++pos) {
          const Relation rel = m.steps[pos % m.steps.size()].relation;
          auto next = hin.sample_neighbor(cur, rel, rng);
          if (!next) break;
          walk.push_back(*next);
          cur = *next;
        }
        if (walk.size() >= 2) corpus.walks.push_back(std::move(walk));
      }
    }
  }
  return corpus;
}

void write_walks(const WalkCorpus& corpus, const Hin& hin, std::ostream& out) {
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i) out << ' ';
      out << kind_letter(hin.kind_of(walk[i])) << ':' << hin.kind_index(walk[i]);
    }
    out << '\n';
  }
}

}  // namespace qroute
