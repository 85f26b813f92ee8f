#include "qroute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "qroute/rng.hpp"

namespace qroute {

double gini(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    total += xs[i];
    weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * xs[i];
  }
  if (total == 0.0) return 0.0;
  return weighted / (n * total);
}

namespace {

std::optional<std::int64_t> nearest_rank(const std::vector<std::int64_t>& sorted, double q) {
  if (sorted.empty()) return std::nullopt;
  auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

}  // namespace

ActivityReport characterize(const EventLog& log) {
  ActivityReport rep;

  std::unordered_map<std::string, std::uint64_t> answers;
  std::unordered_map<std::string, std::int64_t> asked_at;
  std::unordered_map<std::string, std::int64_t> first_answer;
  std::unordered_set<std::string> questions;
  std::unordered_set<std::string> users;

  for (const Event& e : log.events) {
    if (!e.user.empty()) users.insert(e.user);
    switch (e.etype) {
      case EventType::Asked:
        questions.insert(e.question);
        asked_at[e.question] = e.time;
        ++rep.per_user_asked[e.user];
        break;
      case EventType::Answered: {
        questions.insert(e.question);
        ++answers[e.question];
        ++rep.per_user_answered[e.user];
        auto [it, fresh] = first_answer.emplace(e.question, e.time);
        if (!fresh) it->second = std::min(it->second, e.time);
        break;
      }
      default:
        break;
    }
  }

  for (const std::string& q : questions) {
    auto it = answers.find(q);
    ++rep.answers_per_question[it == answers.end() ? 0 : it->second];
  }

  for (const auto& [q, t0] : asked_at) {
    auto it = first_answer.find(q);
    if (it != first_answer.end()) rep.time_to_first_answer.emplace_back(q, it->second - t0);
  }
  std::sort(rep.time_to_first_answer.begin(), rep.time_to_first_answer.end());
  std::vector<std::int64_t> deltas;
  deltas.reserve(rep.time_to_first_answer.size());
  for (const auto& [q, dt] : rep.time_to_first_answer) deltas.push_back(dt);
  std::sort(deltas.begin(), deltas.end());
  rep.ttfa_p10 = nearest_rank(deltas, 0.10);
  rep.ttfa_p50 = nearest_rank(deltas, 0.50);
  rep.ttfa_p90 = nearest_rank(deltas, 0.90);

  rep.n_users = users.size();
  std::vector<double> per_user;
  per_user.reserve(users.size());
  double total_answers = 0.0;
  for (const std::string& u : users) {
    auto it = rep.per_user_answered.find(u);
    const double n = it == rep.per_user_answered.end() ? 0.0 : static_cast<double>(it->second);
    per_user.push_back(n);
    total_answers += n;
  }
  rep.gini_answers = gini(per_user);

  if (total_answers > 0.0 && !per_user.empty()) {
    std::sort(per_user.begin(), per_user.end(), std::greater<>());
    const std::size_t top = std::max<std::size_t>(1, (per_user.size() + 99) / 100);
    double head = 0.0;
    for (std::size_t i = 0; i < top; ++i) head += per_user[i];
    rep.top1pct_answer_share = head / total_answers;
  }
  return rep;
}

double recall_at_k(const std::vector<std::string>& ranking, const RelevantSet& relevant,
                   std::size_t k) {
  if (relevant.empty()) throw EmptyRelevant();
  if (k == 0) throw InputError("k must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.size() && i < k; ++i)
    if (relevant.count(ranking[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double reciprocal_rank(const std::vector<std::string>& ranking, const RelevantSet& relevant) {
  if (relevant.empty()) throw EmptyRelevant();
  for (std::size_t i = 0; i < ranking.size(); ++i)
    if (relevant.count(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double ndcg_at_k(const std::vector<std::string>& ranking, const RelevantSet& relevant,
                 std::size_t k) {
  if (relevant.empty()) throw EmptyRelevant();
  if (k == 0) throw InputError("k must be at least 1");
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranking.size() && i < k; ++i)
    if (relevant.count(ranking[i])) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  return dcg / idcg;
}

namespace {

void accumulate(MetricBlock& block, const std::vector<std::string>& ranking,
                const RelevantSet& relevant, const std::vector<std::size_t>& ks) {
  for (std::size_t k : ks) {
    block.recall_at[k] += recall_at_k(ranking, relevant, k);
    block.ndcg_at[k] += ndcg_at_k(ranking, relevant, k);
  }
  block.mrr += reciprocal_rank(ranking, relevant);
}

void finish(MetricBlock& block, std::size_t n) {
  for (auto& [k, v] : block.recall_at) v /= static_cast<double>(n);
  for (auto& [k, v] : block.ndcg_at) v /= static_cast<double>(n);
  block.mrr /= static_cast<double>(n);
}

}  // namespace

EvalReport evaluate(const std::vector<TestCase>& test, const EmbeddingTable& emb,
                    const Scorer& scorer, const std::vector<Candidate>& candidates,
                    const std::vector<std::size_t>& ks, std::uint64_t seed, const Hin& hin) {
  if (test.empty()) throw EmptyTest();
  if (candidates.empty()) throw NoCandidates();

  EvalReport rep;
  rep.n_cases = test.size();

  std::vector<std::string> popularity;
  {
    std::vector<const Candidate*> by_count;
    for (const Candidate& c : candidates) by_count.push_back(&c);
    std::sort(by_count.begin(), by_count.end(), [](const Candidate* a, const Candidate* b) {
      if (a->train_answers != b->train_answers) return a->train_answers > b->train_answers;
      return a->user < b->user;
    });
    for (const Candidate* c : by_count) popularity.push_back(c->user);
  }

  std::size_t served = 0;
  for (std::size_t ci = 0; ci < test.size(); ++ci) {
    const TestCase& tc = test[ci];
    const RelevantSet relevant(tc.answerers.begin(), tc.answerers.end());

    QuestionProbe probe{tc.question, tc.asker, tc.crops};
    RankedList ranked = recommend(probe, emb, scorer, candidates, candidates.size(), hin);
    if (!ranked.cold_start) ++served;
    std::vector<std::string> ranking;
    ranking.reserve(ranked.ranking.size());
    for (const auto& [user, score] : ranked.ranking) ranking.push_back(user);
    accumulate(rep.pipeline, ranking, relevant, ks);

    std::vector<std::string> shuffled;
    shuffled.reserve(candidates.size());
    for (const Candidate& c : candidates) shuffled.push_back(c.user);
    Rng rng(mix_seed(seed, ci));
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    accumulate(rep.random_baseline, shuffled, relevant, ks);

    accumulate(rep.popularity_baseline, popularity, relevant, ks);
  }

  finish(rep.pipeline, test.size());
  finish(rep.random_baseline, test.size());
  finish(rep.popularity_baseline, test.size());
  rep.coverage = static_cast<double>(served) / static_cast<double>(test.size());
  return rep;
}

namespace {

void put(std::ostream& out, const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out << key << " = " << buf << '\n';
}

void put_block(std::ostream& out, const std::string& prefix, const MetricBlock& b) {
  for (const auto& [k, v] : b.recall_at) put(out, prefix + "recall@" + std::to_string(k), v);
  put(out, prefix + "mrr", b.mrr);
  for (const auto& [k, v] : b.ndcg_at) put(out, prefix + "ndcg@" + std::to_string(k), v);
}

}  // namespace

void write_report(const EvalReport& rep, std::ostream& out) {
  out << "n_cases = " << rep.n_cases << '\n';
  put(out, "coverage", rep.coverage);
  put_block(out, "", rep.pipeline);
  put_block(out, "baseline_random_", rep.random_baseline);
  put_block(out, "baseline_popularity_", rep.popularity_baseline);
}

void write_activity_report(const ActivityReport& rep, std::ostream& out) {
  std::uint64_t questions = 0, answered = 0, answers_total = 0;
  for (const auto& [count, n] : rep.answers_per_question) {
    questions += n;
    if (count > 0) answered += n;
    answers_total += count * n;
  }
  out << "questions = " << questions << '\n';
  out << "answered_questions = " << answered << '\n';
  out << "unanswered_questions = " << (questions - answered) << '\n';
  out << "answers_total = " << answers_total << '\n';
  out << "users = " << rep.n_users << '\n';
  if (rep.ttfa_p10) out << "time_to_first_answer_p10 = " << *rep.ttfa_p10 << '\n';
  if (rep.ttfa_p50) out << "time_to_first_answer_p50 = " << *rep.ttfa_p50 << '\n';
  if (rep.ttfa_p90) out << "time_to_first_answer_p90 = " << *rep.ttfa_p90 << '\n';
  put(out, "gini_answers", rep.gini_answers);
  put(out, "top1pct_answer_share", rep.top1pct_answer_share);
}

void write_answers_histogram_csv(const ActivityReport& rep, std::ostream& out) {
  out << "answers,questions\n";
  for (const auto& [count, n] : rep.answers_per_question) out << count << ',' << n << '\n';
}

void write_ttfa_csv(const ActivityReport& rep, std::ostream& out) {
  out << "question,seconds\n";
  for (const auto& [q, dt] : rep.time_to_first_answer) out << q << ',' << dt << '\n';
}

}  // namespace qroute
