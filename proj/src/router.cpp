#include "qroute/router.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "qroute/kernels.hpp"

namespace qroute {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::optional<std::vector<double>> infer_question_vector(const QuestionProbe& probe,
                                                         const EmbeddingTable& emb,
                                                         const Hin& hin) {
  const std::size_t d = emb.dim;
  if (auto q = hin.find(NodeKind::Question, probe.question); q && emb.has_vector(*q)) {
    const double* row = emb.center_row(*q);
    return std::vector<double>(row, row + d);
  }

  std::vector<double> mean(d, 0.0);
  std::size_t contributors = 0;
  auto add = [&](NodeKind k, const std::string& id) {
    if (auto node = hin.find(k, id); node && emb.has_vector(*node)) {
      kernels::axpy(1.0, emb.center_row(*node), mean.data(), d);
      ++contributors;
    }
  };
  for (const std::string& crop : probe.crops) add(NodeKind::Crop, crop);
  add(NodeKind::User, probe.asker);
  if (contributors == 0) return std::nullopt;
  for (double& v : mean) v /= static_cast<double>(contributors);
  return mean;
}

void pair_features(const double* user_vec, const double* question_vec, std::size_t d,
                   double* out) {
  const double dot = kernels::dot(user_vec, question_vec, d);
  const double nu = std::sqrt(kernels::dot(user_vec, user_vec, d));
  const double nq = std::sqrt(kernels::dot(question_vec, question_vec, d));
  out[0] = dot;
  out[1] = (nu > 0.0 && nq > 0.0) ? dot / (nu * nq) : 0.0;
  kernels::hadamard(user_vec, question_vec, out + 2, d);
}

std::vector<double> pair_features(const std::vector<double>& user_vec,
                                  const std::vector<double>& question_vec) {
  if (user_vec.size() != question_vec.size())
    throw DimensionMismatch("pair_features on different dims");
  std::vector<double> out(user_vec.size() + 2);
  pair_features(user_vec.data(), question_vec.data(), user_vec.size(), out.data());
  return out;
}

LabeledPairs build_training_pairs(const EventLog& train, const Hin& hin,
                                  const EmbeddingTable& emb, std::uint32_t neg_per_pos,
                                  std::uint64_t seed) {
  if (neg_per_pos == 0) throw InputError("neg_per_pos must be positive");

  // Pool: users with a train answer and a vector, in first-answer order
  // (the draw only needs a fixed order, not a sorted one).
  std::vector<std::uint32_t> pool;
  std::unordered_set<std::uint32_t> pooled;
  std::unordered_map<std::uint32_t, std::unordered_set<std::uint32_t>> answerers_of;
  std::unordered_map<std::uint32_t, std::uint32_t> asker_of;
  struct Positive {
    std::uint32_t user, question;
  };
  std::vector<Positive> positives;
  std::unordered_set<std::uint64_t> seen;

  for (const Event& e : train.events) {
    if (e.etype == EventType::Asked) {
      auto u = hin.find(NodeKind::User, e.user);
      auto q = hin.find(NodeKind::Question, e.question);
      if (u && q) asker_of[*q] = *u;
    }
    if (e.etype != EventType::Answered) continue;
    auto u = hin.find(NodeKind::User, e.user);
    auto q = hin.find(NodeKind::Question, e.question);
    if (!u || !q) continue;
    answerers_of[*q].insert(*u);
    if (emb.has_vector(*u) && pooled.insert(*u).second) pool.push_back(*u);
    if (!emb.has_vector(*u) || !emb.has_vector(*q)) continue;
    const std::uint64_t key = (std::uint64_t(*u) << 32) | *q;
    if (seen.insert(key).second) positives.push_back({*u, *q});
  }
  if (positives.empty()) throw NoPositives();

  const std::size_t d = emb.dim;
  LabeledPairs out;
  out.feat_dim = d + 2;
  out.x.reserve(positives.size() * (1 + neg_per_pos) * out.feat_dim);

  Rng rng(seed);
  auto emit = [&](std::uint32_t user, std::uint32_t question, std::uint8_t label) {
    const std::size_t at = out.x.size();
    out.x.resize(at + out.feat_dim);
    pair_features(emb.center_row(user), emb.center_row(question), d, out.x.data() + at);
    out.y.push_back(label);
    ++out.n;
  };

  for (const Positive& pos : positives) {
    emit(pos.user, pos.question, 1);
    const auto& exclude = answerers_of[pos.question];
    const auto asker = asker_of.find(pos.question);
    for (std::uint32_t k = 0; k < neg_per_pos; ++k) {
      std::uint32_t cand = 0;
      bool ok = false;
      for (int tries = 0; tries < 100 && !ok; ++tries) {
        cand = pool[rng.below(pool.size())];
        ok = !exclude.count(cand) && !(asker != asker_of.end() && asker->second == cand);
      }
      if (ok) emit(cand, pos.question, 0);
    }
  }
  return out;
}

double Scorer::margin(const double* feat) const {
  return kernels::dot(weights.data(), feat, weights.size()) + bias;
}

double Scorer::prob(const double* feat) const { return stable_sigmoid(margin(feat)); }

Scorer train_scorer(const LabeledPairs& pairs, const ScorerConfig& cfg) {
  if (pairs.n == 0) throw NoPositives();
  bool any0 = false, any1 = false;
  for (std::uint8_t l : pairs.y) (l ? any1 : any0) = true;
  if (!any0 || !any1) throw SingleClassInput();

  const std::size_t m = pairs.feat_dim;
  std::vector<double> mean(m, 0.0), stdev(m, 0.0);
  for (std::size_t i = 0; i < pairs.n; ++i)
    kernels::axpy(1.0, pairs.row(i), mean.data(), m);
  for (double& v : mean) v /= static_cast<double>(pairs.n);
  for (std::size_t i = 0; i < pairs.n; ++i) {
    const double* r = pairs.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = r[j] - mean[j];
      stdev[j] += c * c;
    }
  }
  for (double& v : stdev) v = std::max(std::sqrt(v / static_cast<double>(pairs.n)), 1e-8);

  std::vector<double> w(m, 0.0), xs(m);
  double b = 0.0;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(pairs.n);
  for (std::size_t i = 0; i < pairs.n; ++i) order[i] = i;

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = pairs.n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t oi : order) {
      const double* r = pairs.row(oi);
      for (std::size_t j = 0; j < m; ++j) xs[j] = (r[j] - mean[j]) / stdev[j];
      const double err = stable_sigmoid(kernels::dot(w.data(), xs.data(), m) + b) -
                         static_cast<double>(pairs.y[oi]);
      for (std::size_t j = 0; j < m; ++j) w[j] -= cfg.lr * (err * xs[j] + cfg.l2 * w[j]);
      b -= cfg.lr * err;
    }
  }

  // Fold (x - mean)/std into the stored parameters.
  Scorer s;
  s.weights.resize(m);
  s.bias = b;
  for (std::size_t j = 0; j < m; ++j) {
    s.weights[j] = w[j] / stdev[j];
    s.bias -= w[j] * mean[j] / stdev[j];
  }
  s.dim = static_cast<std::uint32_t>(m - 2);
  s.seed = cfg.seed;
  s.epochs = cfg.epochs;
  return s;
}

void save_scorer(const Scorer& s, std::ostream& out) {
  out << "scorer v1 dim=" << s.dim << '\n';
  char buf[32];
  auto line = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
    out << '\n';
  };
  for (double w : s.weights) line(w);
  line(s.bias);
}

Scorer load_scorer(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedLine(1, "empty scorer file");
  std::uint32_t d = 0;
  if (std::sscanf(line.c_str(), "scorer v1 dim=%u", &d) != 1)
    throw MalformedLine(1, "expected `scorer v1 dim=<d>` header");

  Scorer s;
  s.dim = d;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v = 0;
    auto r = std::from_chars(line.data(), line.data() + line.size(), v);
    if (r.ec != std::errc() || r.ptr != line.data() + line.size())
      throw MalformedLine(line_no, "bad real");
    values.push_back(v);
  }
  if (values.size() != std::size_t(d) + 3)
    throw MalformedLine(line_no, "scorer file must hold d+2 weights and a bias");
  s.bias = values.back();
  values.pop_back();
  s.weights = std::move(values);
  return s;
}

std::vector<Candidate> candidate_pool(const EventLog& train, const Hin& hin) {
  std::map<std::string, std::int64_t> counts;
  for (const Event& e : train.events)
    if (e.etype == EventType::Answered) ++counts[e.user];
  std::vector<Candidate> pool;
  pool.reserve(counts.size());
  for (const auto& [user, n] : counts) {
    auto node = hin.find(NodeKind::User, user);
    if (!node) continue;
    pool.push_back({user, *node, n});
  }
  return pool;
}

RankedList recommend(const QuestionProbe& probe, const EmbeddingTable& emb, const Scorer& scorer,
                     const std::vector<Candidate>& candidates, std::size_t top_k,
                     const Hin& hin) {
  if (candidates.empty()) throw NoCandidates();
  if (scorer.weights.size() != std::size_t(emb.dim) + 2)
    throw DimensionMismatch("scorer dim does not match the embeddings");

  RankedList out;
  out.question = probe.question;

  auto q_vec = infer_question_vector(probe, emb, hin);
  if (!q_vec) {
    out.cold_start = true;
    for (const Candidate& c : candidates) {
      if (c.user == probe.asker) continue;
      out.ranking.emplace_back(c.user, static_cast<double>(c.train_answers));
    }
  } else {
    std::vector<double> feat(emb.dim + 2);
    for (const Candidate& c : candidates) {
      if (c.user == probe.asker || !emb.has_vector(c.node)) continue;
      pair_features(emb.center_row(c.node), q_vec->data(), emb.dim, feat.data());
      out.ranking.emplace_back(c.user, scorer.prob(feat.data()));
    }
  }

  std::sort(out.ranking.begin(), out.ranking.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (out.ranking.size() > top_k) out.ranking.resize(top_k);
  return out;
}

void write_ranked_csv(const RankedList& list, std::ostream& out) {
  out << "question,rank,user,score\n";
  char buf[64];
  for (std::size_t i = 0; i < list.ranking.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", list.ranking[i].second);
    out << list.question << ',' << (i + 1) << ',' << list.ranking[i].first << ',' << buf << '\n';
  }
}

}  // namespace qroute
