#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "qroute/corpus.hpp"
#include "qroute/router.hpp"

namespace qroute {

struct ActivityReport {
  // answer count -> number of questions (0 included for asked-but-unanswered)
  std::map<std::uint64_t, std::uint64_t> answers_per_question;
  std::vector<std::pair<std::string, std::int64_t>> time_to_first_answer;  // question, seconds
  std::optional<std::int64_t> ttfa_p10, ttfa_p50, ttfa_p90;  // nearest-rank percentiles
  std::map<std::string, std::uint64_t> per_user_asked;
  std::map<std::string, std::uint64_t> per_user_answered;
  std::uint64_t n_users = 0;  // users with any event; the gini population
  double gini_answers = 0.0;
  double top1pct_answer_share = 0.0;
};

// Sorted-sum Gini: G = sum_i (2i - n - 1) x_(i) / (n sum x) with x ascending
// and 1-based i; 0 when the total is 0.
double gini(std::vector<double> xs);

// Activity statistics over a full event log. The question universe is every
// question with an Asked or Answered event; the gini population is every
// user appearing in any event.
ActivityReport characterize(const EventLog& log);

using RelevantSet = std::unordered_set<std::string>;

double recall_at_k(const std::vector<std::string>& ranking, const RelevantSet& relevant,
                   std::size_t k);
double reciprocal_rank(const std::vector<std::string>& ranking, const RelevantSet& relevant);
// Binary gains: DCG = sum over relevant hits at 1-based i <= k of 1/log2(i+1),
// normalized by the ideal prefix.
double ndcg_at_k(const std::vector<std::string>& ranking, const RelevantSet& relevant,
                 std::size_t k);

struct MetricBlock {
  std::map<std::size_t, double> recall_at;
  std::map<std::size_t, double> ndcg_at;
  double mrr = 0.0;
};

struct EvalReport {
  std::size_t n_cases = 0;
  double coverage = 0.0;  // fraction of cases served without cold-start fallback
  MetricBlock pipeline;
  MetricBlock random_baseline;      // seeded uniform shuffle per case
  MetricBlock popularity_baseline;  // train answer count, descending
};

// Ranks the full candidate set per test case and averages the metrics; the
// two baselines run on identical cases.
EvalReport evaluate(const std::vector<TestCase>& test, const EmbeddingTable& emb,
                    const Scorer& scorer, const std::vector<Candidate>& candidates,
                    const std::vector<std::size_t>& ks, std::uint64_t seed, const Hin& hin);

// Flat `key = value` lines, one metric per line.
void write_report(const EvalReport& report, std::ostream& out);
void write_activity_report(const ActivityReport& report, std::ostream& out);
// Plot-ready CSVs behind the stats command.
void write_answers_histogram_csv(const ActivityReport& report, std::ostream& out);
void write_ttfa_csv(const ActivityReport& report, std::ostream& out);

}  // namespace qroute
