#include "qroute/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qroute/rng.hpp"

namespace qroute {

namespace {

constexpr const char* kHeader = "etype,user,question,crop,time";

bool valid_id(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (c == ',' || std::isspace(c)) return false;
  return true;
}

// Exactly five comma-separated fields; empty fields allowed.
bool split5(const std::string& line, std::string out[5]) {
  std::size_t field = 0, start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      if (field == 5) return false;
      out[field++] = line.substr(start, i - start);
      start = i + 1;
    }
  }
  return field == 5;
}

bool parse_time(const std::string& s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string tuple_key(const Event& e) {
  return std::to_string(static_cast<int>(e.etype)) + "|" + e.user + "|" + e.question + "|" +
         e.crop;
}

const char* etype_name(EventType t) {
  switch (t) {
    case EventType::Asked: return "asked";
    case EventType::Answered: return "answered";
    case EventType::Tagged: return "tagged";
    case EventType::Interested: return "interested";
  }
  return "?";
}

}  // namespace

EventLog parse_events(std::istream& in, ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;
  rep = ParseReport{};

  std::string line;
  if (!std::getline(in, line)) throw MalformedLine(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw MalformedLine(1, "expected header '" + std::string(kHeader) + "'");

  EventLog log;
  std::unordered_set<std::string> asked;
  std::unordered_set<std::string> static_seen;
  std::size_t line_no = 1;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string f[5];
    if (!split5(line, f)) throw MalformedLine(line_no, "expected 5 fields");

    Event e;
    if (f[0] == "asked") e.etype = EventType::Asked;
    else if (f[0] == "answered") e.etype = EventType::Answered;
    else if (f[0] == "tagged") e.etype = EventType::Tagged;
    else if (f[0] == "interested") e.etype = EventType::Interested;
    else throw MalformedLine(line_no, "unknown etype '" + f[0] + "'");

    const bool timed = e.etype == EventType::Asked || e.etype == EventType::Answered;
    const bool wants_user = e.etype != EventType::Tagged;
    const bool wants_question = e.etype != EventType::Interested;
    const bool wants_crop = !timed;

    auto take = [&](std::string& dst, const std::string& src, bool wanted, const char* name) {
      if (wanted) {
        if (!valid_id(src)) throw MalformedLine(line_no, std::string("bad ") + name + " id");
        dst = src;
      } else if (!src.empty()) {
        throw MalformedLine(line_no,
                            std::string(name) + " must be empty for " + etype_name(e.etype));
      }
    };
    take(e.user, f[1], wants_user, "user");
    take(e.question, f[2], wants_question, "question");
    take(e.crop, f[3], wants_crop, "crop");
    if (timed) {
      if (!parse_time(f[4], e.time)) throw MalformedLine(line_no, "bad timestamp '" + f[4] + "'");
    } else if (!f[4].empty()) {
      throw MalformedLine(line_no, std::string("time must be empty for ") + etype_name(e.etype));
    }

    if (e.etype == EventType::Asked && !asked.insert(e.question).second)
      throw DuplicateAsked(e.question);
    if (e.etype == EventType::Tagged || e.etype == EventType::Interested) {
      if (!static_seen.insert(tuple_key(e)).second) {
        ++rep.duplicate_static;
        continue;
      }
    }
    log.events.push_back(std::move(e));
  }

  for (const Event& e : log.events) {
    if (e.etype == EventType::Answered && !asked.count(e.question)) ++rep.orphan_answered;
    if (e.etype == EventType::Tagged && !asked.count(e.question)) ++rep.orphan_tagged;
  }
  return log;
}

void write_events(const EventLog& log, std::ostream& out) {
  out << kHeader << '\n';
  for (const Event& e : log.events) {
    out << etype_name(e.etype) << ',' << e.user << ',' << e.question << ',' << e.crop << ',';
    if (e.time != kNoTime) out << e.time;
    out << '\n';
  }
}

SplitResult temporal_split(const EventLog& log, const SplitSpec& spec) {
  const bool by_fraction = spec.cutoff_fraction != 0.0;
  const bool by_time = spec.cutoff_time != kNoTime;
  if (by_fraction == by_time)
    throw InputError("split spec must set exactly one of cutoff_fraction, cutoff_time");

  std::vector<std::int64_t> ask_times;
  for (const Event& e : log.events)
    if (e.etype == EventType::Asked) ask_times.push_back(e.time);
  if (ask_times.empty()) throw DegenerateSplit("log has no Asked events");

  SplitResult res;
  if (by_fraction) {
    if (!(spec.cutoff_fraction > 0.0 && spec.cutoff_fraction < 1.0))
      throw InputError("cutoff_fraction must lie in (0,1)");
    std::sort(ask_times.begin(), ask_times.end());
    // smallest ask time t with |{time <= t}| >= f * N
    auto k = static_cast<std::size_t>(
        std::ceil(spec.cutoff_fraction * static_cast<double>(ask_times.size()) - 1e-9));
    k = std::max<std::size_t>(k, 1);
    res.cutoff = ask_times[std::min(k, ask_times.size()) - 1];
  } else {
    res.cutoff = spec.cutoff_time;
  }

  // Timed events at or before the cutoff, then static events anchored to them.
  std::unordered_set<std::string> train_questions, train_users;
  for (const Event& e : log.events) {
    if ((e.etype == EventType::Asked || e.etype == EventType::Answered) && e.time <= res.cutoff) {
      train_questions.insert(e.question);
      train_users.insert(e.user);
    }
  }
  for (const Event& e : log.events) {
    switch (e.etype) {
      case EventType::Asked:
      case EventType::Answered:
        if (e.time <= res.cutoff) res.train.events.push_back(e);
        break;
      case EventType::Tagged:
        if (train_questions.count(e.question)) res.train.events.push_back(e);
        break;
      case EventType::Interested:
        if (train_users.count(e.user)) res.train.events.push_back(e);
        break;
    }
  }

  // One case per post-cutoff question that got at least one answer.
  std::unordered_map<std::string, std::set<std::string>> answerers;
  std::unordered_map<std::string, std::vector<std::string>> crops;
  for (const Event& e : log.events) {
    if (e.etype == EventType::Answered) answerers[e.question].insert(e.user);
    if (e.etype == EventType::Tagged) {
      auto& v = crops[e.question];
      if (std::find(v.begin(), v.end(), e.crop) == v.end()) v.push_back(e.crop);
    }
  }
  for (const Event& e : log.events) {
    if (e.etype != EventType::Asked || e.time <= res.cutoff) continue;
    auto it = answerers.find(e.question);
    if (it == answerers.end() || it->second.empty()) continue;
    TestCase tc;
    tc.question = e.question;
    tc.asker = e.user;
    if (auto c = crops.find(e.question); c != crops.end()) tc.crops = c->second;
    tc.answerers.assign(it->second.begin(), it->second.end());
    res.test.push_back(std::move(tc));
  }

  if (res.train.events.empty() || res.test.empty())
    throw DegenerateSplit("split produced an empty train or test side");
  return res;
}

void write_test_cases(const std::vector<TestCase>& cases, std::ostream& out) {
  out << "question,asker,crops,answerers\n";
  auto join = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ';';
      out << v[i];
    }
  };
  for (const TestCase& tc : cases) {
    out << tc.question << ',' << tc.asker << ',';
    join(tc.crops);
    out << ',';
    join(tc.answerers);
    out << '\n';
  }
}

void SynthConfig::validate() const {
  if (n_clusters == 0 || n_users == 0 || n_crops == 0 || n_questions == 0)
    throw InputError("synth counts must be positive");
  if (n_crops < n_clusters) throw InputError("need n_crops >= n_clusters");
  if (n_users < n_clusters) throw InputError("need n_users >= n_clusters");
  if (!(answers_per_question_mean > 0)) throw InputError("answers_per_question_mean must be > 0");
  if (cross_cluster_noise < 0.0 || cross_cluster_noise > 1.0)
    throw InputError("cross_cluster_noise must lie in [0,1]");
  if (time_span_seconds <= 0) throw InputError("time_span_seconds must be positive");
}

namespace {

// Knuth. Fine for the small means used here.
std::uint32_t draw_poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  double p = 1.0;
  std::uint32_t k = 0;
  do {
    ++k;
    p *= rng.uniform01();
  } while (p > limit);
  return k - 1;
}

std::int64_t draw_exp_seconds(Rng& rng, double mean) {
  double u = rng.uniform01();
  if (u >= 1.0) u = 0.0;  // uniform01 may round to 1
  return std::llround(-mean * std::log1p(-u));
}

// k distinct picks from `pool` via partial Fisher-Yates on a scratch copy.
std::vector<std::uint32_t> draw_distinct(Rng& rng, const std::vector<std::uint32_t>& pool,
                                         std::size_t k) {
  std::vector<std::uint32_t> scratch = pool;
  k = std::min(k, scratch.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.below(scratch.size() - i);
    std::swap(scratch[i], scratch[j]);
  }
  scratch.resize(k);
  return scratch;
}

}  // namespace

EventLog synth_generate(const SynthConfig& cfg, SynthTruth* truth) {
  cfg.validate();
  Rng rng(cfg.seed);

  std::vector<std::uint32_t> crop_cluster(cfg.n_crops);
  for (std::uint32_t c = 0; c < cfg.n_crops; ++c) crop_cluster[c] = c % cfg.n_clusters;

  std::vector<std::uint32_t> user_cluster(cfg.n_users);
  for (std::uint32_t u = 0; u < cfg.n_users; ++u)
    user_cluster[u] = static_cast<std::uint32_t>(rng.below(cfg.n_clusters));

  // Skewed activity: a minority of heavy answerers per cluster, mirroring the
  // strong user-activity imbalance seen on real Q&A platforms.
  std::vector<double> user_weight(cfg.n_users);
  for (std::uint32_t u = 0; u < cfg.n_users; ++u)
    user_weight[u] = rng.uniform01() < 0.2 ? 10.0 : 1.0;

  std::vector<std::vector<std::uint32_t>> cluster_users(cfg.n_clusters);
  std::vector<std::vector<std::uint32_t>> cluster_crops(cfg.n_clusters);
  for (std::uint32_t u = 0; u < cfg.n_users; ++u) cluster_users[user_cluster[u]].push_back(u);
  for (std::uint32_t c = 0; c < cfg.n_crops; ++c) cluster_crops[crop_cluster[c]].push_back(c);

  // Every planted cluster must be answerable: backfill empty ones from the
  // largest (n_users >= n_clusters makes this always succeed).
  for (std::uint32_t k = 0; k < cfg.n_clusters; ++k) {
    while (cluster_users[k].empty()) {
      std::uint32_t largest = 0;
      for (std::uint32_t j = 1; j < cfg.n_clusters; ++j)
        if (cluster_users[j].size() > cluster_users[largest].size()) largest = j;
      const std::uint32_t moved = cluster_users[largest].back();
      cluster_users[largest].pop_back();
      cluster_users[k].push_back(moved);
      user_cluster[moved] = k;
    }
  }

  // Cumulative weights per cluster for the in-cluster answerer draw.
  std::vector<std::vector<double>> cluster_cum(cfg.n_clusters);
  for (std::uint32_t k = 0; k < cfg.n_clusters; ++k) {
    double acc = 0.0;
    for (std::uint32_t u : cluster_users[k]) cluster_cum[k].push_back(acc += user_weight[u]);
  }

  auto draw_in_cluster = [&](Rng& r, std::uint32_t k) {
    const auto& cum = cluster_cum[k];
    double x = r.uniform01() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), x);
    std::size_t i = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
    return cluster_users[k][i];
  };

  auto uname = [](std::uint32_t u) { return "u" + std::to_string(u); };
  auto qname = [](std::uint32_t q) { return "q" + std::to_string(q); };
  auto cname = [](std::uint32_t c) { return "c" + std::to_string(c); };

  EventLog log;
  for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
    std::size_t k = 1 + rng.below(3);
    for (std::uint32_t crop : draw_distinct(rng, cluster_crops[user_cluster[u]], k))
      log.events.push_back({EventType::Interested, uname(u), "", cname(crop), kNoTime});
  }

  std::vector<std::uint32_t> question_cluster(cfg.n_questions);
  for (std::uint32_t q = 0; q < cfg.n_questions; ++q) {
    const auto asker = static_cast<std::uint32_t>(rng.below(cfg.n_users));
    const auto cluster = static_cast<std::uint32_t>(rng.below(cfg.n_clusters));
    question_cluster[q] = cluster;
    const std::int64_t ask_time =
        static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cfg.time_span_seconds)));
    log.events.push_back({EventType::Asked, uname(asker), qname(q), "", ask_time});

    std::size_t n_tags = 1 + rng.below(3);
    for (std::uint32_t crop : draw_distinct(rng, cluster_crops[cluster], n_tags))
      log.events.push_back({EventType::Tagged, "", qname(q), cname(crop), kNoTime});

    std::uint32_t n_answers = std::max<std::uint32_t>(
        1, draw_poisson(rng, cfg.answers_per_question_mean));
    for (std::uint32_t a = 0; a < n_answers; ++a) {
      std::uint32_t answerer;
      if (rng.uniform01() < cfg.cross_cluster_noise)
        answerer = static_cast<std::uint32_t>(rng.below(cfg.n_users));
      else
        answerer = draw_in_cluster(rng, cluster);
      const std::int64_t at = ask_time + draw_exp_seconds(rng, 3600.0);
      log.events.push_back({EventType::Answered, uname(answerer), qname(q), "", at});
    }
  }

  if (truth) {
    truth->user_cluster = std::move(user_cluster);
    truth->crop_cluster = std::move(crop_cluster);
    truth->question_cluster = std::move(question_cluster);
    truth->user_weight = std::move(user_weight);
  }
  return log;
}

}  // namespace qroute
