#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qroute/corpus.hpp"
#include "qroute/hin.hpp"
#include "qroute/sgns.hpp"

namespace qroute {

struct QuestionProbe {
  std::string question;              // may be unknown to the graph
  std::string asker;                 // required
  std::vector<std::string> crops;    // deduplicated
};

// Question vector for routing: the question's own embedding when it is in
// the vocabulary, otherwise the mean of its known crops and asker. nullopt
// is the cold-start signal (no representable context at all).
std::optional<std::vector<double>> infer_question_vector(const QuestionProbe& probe,
                                                         const EmbeddingTable& emb,
                                                         const Hin& hin);

// Writes [dot, cosine, hadamard_1..hadamard_d] (d+2 values) into out.
// cosine is 0 by convention when either norm is 0.
void pair_features(const double* user_vec, const double* question_vec, std::size_t d,
                   double* out);
std::vector<double> pair_features(const std::vector<double>& user_vec,
                                  const std::vector<double>& question_vec);

struct LabeledPairs {
  std::size_t n = 0;
  std::size_t feat_dim = 0;
  std::vector<double> x;       // n rows of feat_dim
  std::vector<std::uint8_t> y;
  const double* row(std::size_t i) const { return x.data() + i * feat_dim; }
};

// Positives are the distinct train (answerer, question) pairs with vectors;
// each gets neg_per_pos uniform draws from the active-answerer pool minus
// the question's answerers and asker.
LabeledPairs build_training_pairs(const EventLog& train, const Hin& hin,
                                  const EmbeddingTable& emb, std::uint32_t neg_per_pos,
                                  std::uint64_t seed);

struct Scorer {
  std::vector<double> weights;  // d+2, standardization folded in
  double bias = 0.0;
  std::uint32_t dim = 0;  // embedding dim it was trained against
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;

  double margin(const double* feat) const;
  double prob(const double* feat) const;
};

struct ScorerConfig {
  std::uint32_t epochs = 10;
  double lr = 0.05;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
};

// Logistic regression by SGD on per-coordinate standardized features; the
// affine standardization is folded into the returned parameters so scoring
// consumes raw features.
Scorer train_scorer(const LabeledPairs& pairs, const ScorerConfig& cfg);

// `scorer v1 dim=<d>` then d+2 weights and the bias, one real per line.
void save_scorer(const Scorer& s, std::ostream& out);
Scorer load_scorer(std::istream& in);

struct Candidate {
  std::string user;
  std::uint32_t node = 0;
  std::int64_t train_answers = 0;
};

// Users with at least one train answer, ascending by id.
std::vector<Candidate> candidate_pool(const EventLog& train, const Hin& hin);

struct RankedList {
  std::string question;
  std::vector<std::pair<std::string, double>> ranking;  // score desc, then id asc
  bool cold_start = false;  // popularity fallback was used
};

// Scores every candidate with a vector (never the probe's asker) and keeps
// the top_k. Cold-start probes fall back to ranking by train answer count.
RankedList recommend(const QuestionProbe& probe, const EmbeddingTable& emb, const Scorer& scorer,
                     const std::vector<Candidate>& candidates, std::size_t top_k, const Hin& hin);

// `question,rank,user,score` with score to 6 decimal places.
void write_ranked_csv(const RankedList& list, std::ostream& out);

}  // namespace qroute
