#include "qroute/sgns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <thread>

#include "qroute/kernels.hpp"

namespace qroute {

namespace {

double sigmoid_clamped(double x) {
  x = std::clamp(x, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-x));
}

double log_sigmoid_clamped(double x) {
  x = std::clamp(x, -30.0, 30.0);
  return -std::log1p(std::exp(-x));
}

void check_dims(std::span<const double> center, std::span<const double> context,
                std::span<const std::vector<double>> negatives) {
  if (center.size() != context.size())
    throw DimensionMismatch("center and context dims differ");
  for (const auto& n : negatives)
    if (n.size() != center.size()) throw DimensionMismatch("negative dim differs");
}

}  // namespace

std::size_t EmbeddingTable::vocab_size() const {
  std::size_t n = 0;
  for (std::uint8_t h : has) n += h;
  return n;
}

std::pair<Vocab, NoiseTable> build_vocab(const WalkCorpus& corpus, const Hin& hin,
                                         double noise_power) {
  if (corpus.walks.empty()) throw EmptyCorpus();

  Vocab vocab;
  vocab.freq.assign(hin.node_count(), 0);
  for (const auto& walk : corpus.walks)
    for (std::uint32_t node : walk) {
      ++vocab.freq[node];
      ++vocab.total;
    }

  NoiseTable noise;
  std::array<std::vector<double>, kNumKinds> kind_w;
  std::vector<double> global_w;
  for (std::uint32_t node = 0; node < vocab.freq.size(); ++node) {
    if (vocab.freq[node] == 0) continue;
    const double w = std::pow(static_cast<double>(vocab.freq[node]), noise_power);
    const auto k = static_cast<std::size_t>(hin.kind_of(node));
    noise.per_kind[k].nodes.push_back(node);
    kind_w[k].push_back(w);
    noise.global.nodes.push_back(node);
    global_w.push_back(w);
  }
  for (std::size_t k = 0; k < kNumKinds; ++k)
    if (!kind_w[k].empty()) noise.per_kind[k].alias = alias_build(kind_w[k]);
  noise.global.alias = alias_build(global_w);
  return {std::move(vocab), std::move(noise)};
}

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::vector<double>> negatives) {
  check_dims(center, context, negatives);
  const std::size_t d = center.size();
  double loss = -log_sigmoid_clamped(kernels::dot(center.data(), context.data(), d));
  for (const auto& n : negatives)
    loss -= log_sigmoid_clamped(-kernels::dot(center.data(), n.data(), d));
  return loss;
}

PairGrad sgns_pair_grad(std::span<const double> center, std::span<const double> context,
                        std::span<const std::vector<double>> negatives) {
  check_dims(center, context, negatives);
  const std::size_t d = center.size();

  PairGrad g;
  g.center.assign(d, 0.0);
  g.context.assign(d, 0.0);
  g.negatives.resize(negatives.size());

  const double gpos = sigmoid_clamped(kernels::dot(center.data(), context.data(), d)) - 1.0;
  kernels::axpy(gpos, context.data(), g.center.data(), d);
  kernels::axpy(gpos, center.data(), g.context.data(), d);
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    const double gneg =
        sigmoid_clamped(kernels::dot(center.data(), negatives[j].data(), d));
    kernels::axpy(gneg, negatives[j].data(), g.center.data(), d);
    g.negatives[j].assign(d, 0.0);
    kernels::axpy(gneg, center.data(), g.negatives[j].data(), d);
  }
  return g;
}

namespace {

struct TrainerShared {
  const Hin& hin;
  const TrainConfig& cfg;
  const NoiseTable& noise;
  EmbeddingTable& emb;
};

// One pass over [begin, end) walks. `total_centers` scopes the linear lr
// decay; `processed` carries the running center-position count across epochs.
void train_range(TrainerShared& sh, const WalkCorpus& corpus, std::size_t begin, std::size_t end,
                 Rng& rng, std::uint64_t total_centers, std::uint64_t& processed,
                 TrainStats* stats) {
  const std::size_t d = sh.cfg.dim;
  const double lr_floor = sh.cfg.lr0 * 1e-4;
  std::vector<double> grad_center(d);
  std::vector<std::uint32_t> negs(sh.cfg.negatives);
  std::vector<double> neg_sig(sh.cfg.negatives);

  for (std::size_t wi = begin; wi < end; ++wi) {
    const auto& walk = corpus.walks[wi];
    const auto len = static_cast<std::ptrdiff_t>(walk.size());
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const double frac =
          static_cast<double>(processed) / static_cast<double>(total_centers);
      const double lr = std::max(sh.cfg.lr0 * (1.0 - frac), lr_floor);
      ++processed;

      const auto radius = static_cast<std::ptrdiff_t>(1 + rng.below(sh.cfg.window));
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - radius);
      const std::ptrdiff_t hi = std::min(len - 1, i + radius);
      const std::uint32_t center_node = walk[i];
      double* cu = sh.emb.center_row(center_node);

      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const std::uint32_t context_node = walk[j];
        const NodeKind ctx_kind = sh.hin.kind_of(context_node);
        if (stats) ++stats->pairs;

        std::size_t n_negs = 0;
        for (std::uint32_t k = 0; k < sh.cfg.negatives; ++k) {
          // one draw plus at most 10 redraws on collision with the context
          std::uint32_t cand = context_node;
          int tries = 0;
          while (cand == context_node && tries < 11) {
            cand = sh.noise.sample(ctx_kind, sh.cfg.kind_aware_negatives, rng);
            ++tries;
          }
          if (cand == context_node) {
            if (stats) ++stats->negatives_skipped;
            continue;
          }
          negs[n_negs++] = cand;
          if (stats) {
            ++stats->negatives_drawn;
            if (sh.hin.kind_of(cand) != ctx_kind) ++stats->kind_mismatches;
          }
        }

        // One SGD step on the pair: all dots at the pre-step point, then the
        // context-side updates, then the accumulated center update.
        double* cv = sh.emb.context_row(context_node);
        const double gpos = sigmoid_clamped(kernels::dot(cu, cv, d)) - 1.0;
        for (std::size_t k = 0; k < n_negs; ++k)
          neg_sig[k] = sigmoid_clamped(kernels::dot(cu, sh.emb.context_row(negs[k]), d));

        std::fill(grad_center.begin(), grad_center.end(), 0.0);
        kernels::axpy(gpos, cv, grad_center.data(), d);
        kernels::axpy(-lr * gpos, cu, cv, d);
        for (std::size_t k = 0; k < n_negs; ++k) {
          double* cn = sh.emb.context_row(negs[k]);
          kernels::axpy(neg_sig[k], cn, grad_center.data(), d);
          kernels::axpy(-lr * neg_sig[k], cu, cn, d);
        }
        kernels::axpy(-lr, grad_center.data(), cu, d);
      }
    }
  }
}

}  // namespace

EmbeddingTable train(const WalkCorpus& corpus, const Hin& hin, const TrainConfig& cfg,
                     const EpochHook& on_epoch, TrainStats* stats) {
  if (cfg.dim == 0 || cfg.window == 0 || cfg.negatives == 0 || cfg.epochs == 0 ||
      cfg.workers == 0 || !(cfg.lr0 > 0))
    throw InputError("bad train config");
  auto [vocab, noise] = build_vocab(corpus, hin, cfg.noise_power);

  EmbeddingTable emb;
  emb.dim = cfg.dim;
  emb.n_nodes = hin.node_count();
  emb.has.assign(emb.n_nodes, 0);
  emb.center.assign(emb.n_nodes * std::size_t(cfg.dim), 0.0);
  emb.context.assign(emb.n_nodes * std::size_t(cfg.dim), 0.0);

  Rng rng(cfg.seed);
  for (std::uint32_t node = 0; node < emb.n_nodes; ++node) {
    if (vocab.freq[node] == 0) continue;
    emb.has[node] = 1;
    double* row = emb.center_row(node);
    for (std::uint32_t k = 0; k < cfg.dim; ++k)
      row[k] = (rng.uniform01() - 0.5) / static_cast<double>(cfg.dim);
  }

  TrainerShared shared{hin, cfg, noise, emb};
  const std::uint64_t tokens = corpus.token_count();

  if (cfg.workers == 1) {
    const std::uint64_t total_centers = std::uint64_t(cfg.epochs) * tokens;
    std::uint64_t processed = 0;
    for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      train_range(shared, corpus, 0, corpus.walks.size(), rng, total_centers, processed, stats);
      if (on_epoch) on_epoch(epoch, emb);
    }
    return emb;
  }

  // Lock-free parallel path: contiguous walk ranges per worker, private rng
  // and lr counter, shared tables without mutual exclusion.
  const std::size_t workers = std::min<std::size_t>(cfg.workers, corpus.walks.size());
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::vector<std::uint64_t> share_tokens(workers, 0), processed(workers, 0);
  const std::size_t chunk = (corpus.walks.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(corpus.walks.size(), b + chunk);
    ranges.emplace_back(b, e);
    for (std::size_t i = b; i < e; ++i) share_tokens[w] += corpus.walks[i].size();
  }
  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w, epoch] {
        Rng wrng(mix_seed(mix_seed(cfg.seed, w + 1), epoch));
        train_range(shared, corpus, ranges[w].first, ranges[w].second, wrng,
                    std::uint64_t(cfg.epochs) * share_tokens[w], processed[w],
                    w == 0 ? stats : nullptr);
      });
    }
    for (auto& t : pool) t.join();
    if (on_epoch) on_epoch(epoch, emb);
  }
  return emb;
}

namespace {

void write_real(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

void write_rows(const EmbeddingTable& emb, const Hin& hin, std::ostream& out,
                const std::vector<double>& table) {
  for (std::uint32_t node = 0; node < emb.n_nodes; ++node) {
    if (!emb.has_vector(node)) continue;
    out << kind_letter(hin.kind_of(node)) << ':' << hin.kind_index(node);
    const double* row = table.data() + std::size_t(node) * emb.dim;
    for (std::uint32_t k = 0; k < emb.dim; ++k) {
      out << ' ';
      write_real(out, row[k]);
    }
    out << '\n';
  }
}

}  // namespace

void save_embeddings(const EmbeddingTable& emb, const Hin& hin, std::ostream& out,
                     bool dump_context) {
  out << emb.vocab_size() << ' ' << emb.dim << '\n';
  write_rows(emb, hin, out, emb.center);
  if (dump_context) {
    out << "#context\n";
    write_rows(emb, hin, out, emb.context);
  }
}

EmbeddingTable load_embeddings(std::istream& in, const Hin& hin) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedLine(1, "empty embedding file");
  std::size_t n = 0;
  std::uint32_t d = 0;
  {
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(p, end, n);
    if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ' ')
      throw MalformedLine(1, "expected `N d` header");
    auto r2 = std::from_chars(r1.ptr + 1, end, d);
    if (r2.ec != std::errc() || r2.ptr != end) throw MalformedLine(1, "expected `N d` header");
  }

  EmbeddingTable emb;
  emb.dim = d;
  emb.n_nodes = hin.node_count();
  emb.has.assign(emb.n_nodes, 0);
  emb.center.assign(emb.n_nodes * std::size_t(d), 0.0);
  emb.context.assign(emb.n_nodes * std::size_t(d), 0.0);

  bool in_context = false;
  std::size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "#context") {
      in_context = true;
      continue;
    }
    if (line.empty()) continue;

    NodeKind kind;
    switch (line[0]) {
      case 'u': kind = NodeKind::User; break;
      case 'q': kind = NodeKind::Question; break;
      case 'c': kind = NodeKind::Crop; break;
      default: throw MalformedLine(line_no, "bad node key");
    }
    if (line.size() < 3 || line[1] != ':') throw MalformedLine(line_no, "bad node key");
    const char* p = line.data() + 2;
    const char* end = line.data() + line.size();
    std::uint32_t kind_idx = 0;
    auto rk = std::from_chars(p, end, kind_idx);
    if (rk.ec != std::errc()) throw MalformedLine(line_no, "bad node index");
    if (kind_idx >= hin.count(kind))
      throw MalformedLine(line_no, "node index outside the graph");
    const std::uint32_t node = hin.flat(kind, kind_idx);

    double* row = (in_context ? emb.context.data() : emb.center.data()) + std::size_t(node) * d;
    p = rk.ptr;
    for (std::uint32_t k = 0; k < d; ++k) {
      if (p == end || *p != ' ') throw MalformedLine(line_no, "expected " + std::to_string(d) +
                                                                  " components");
      ++p;
      auto rv = std::from_chars(p, end, row[k]);
      if (rv.ec != std::errc()) throw MalformedLine(line_no, "bad real");
      p = rv.ptr;
    }
    if (p != end) throw MalformedLine(line_no, "trailing characters");
    if (!in_context) {
      emb.has[node] = 1;
      ++rows;
    }
  }
  if (rows != n)
    throw MalformedLine(line_no, "header announced " + std::to_string(n) + " rows, found " +
                                     std::to_string(rows));
  return emb;
}

}  // namespace qroute
