#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "qroute/errors.hpp"

namespace qroute {

enum class EntityKind : std::uint8_t { User = 0, Question = 1, Crop = 2 };

struct EntityRef {
  EntityKind kind;
  std::string id;
  bool operator==(const EntityRef&) const = default;
};

enum class EventType : std::uint8_t { Asked = 0, Answered = 1, Tagged = 2, Interested = 3 };

inline constexpr std::int64_t kNoTime = std::numeric_limits<std::int64_t>::min();

// One record. Absent fields are empty strings (kNoTime for time); which
// fields must be present is fixed by etype:
//   asked/answered: user, question, time   tagged: question, crop
//   interested: user, crop
struct Event {
  EventType etype;
  std::string user;
  std::string question;
  std::string crop;
  std::int64_t time = kNoTime;
  bool operator==(const Event&) const = default;
};

struct EventLog {
  std::vector<Event> events;
  bool operator==(const EventLog&) const = default;
};

struct ParseReport {
  std::size_t orphan_answered = 0;  // Answered whose question was never Asked (kept)
  std::size_t orphan_tagged = 0;    // Tagged whose question was never Asked (kept)
  std::size_t duplicate_static = 0; // repeated Tagged/Interested tuples (dropped)
};

// CSV in, CSV out. Header `etype,user,question,crop,time`, one event per
// line, absent fields empty, `\n` endings. parse(write(log)) == log.
EventLog parse_events(std::istream& in, ParseReport* report = nullptr);
void write_events(const EventLog& log, std::ostream& out);

// Exactly one of the two members may be set.
struct SplitSpec {
  double cutoff_fraction = 0.0;       // in (0,1) when set
  std::int64_t cutoff_time = kNoTime; // != kNoTime when set
  static SplitSpec fraction(double f) { return {f, kNoTime}; }
  static SplitSpec at_time(std::int64_t t) { return {0.0, t}; }
};

struct TestCase {
  std::string question;
  std::string asker;
  std::vector<std::string> crops;      // deduplicated, log order
  std::vector<std::string> answerers;  // distinct, ascending
};

struct SplitResult {
  EventLog train;
  std::vector<TestCase> test;
  std::int64_t cutoff = 0;  // resolved cutoff time
};

SplitResult temporal_split(const EventLog& log, const SplitSpec& spec);

// `question,asker,crops(;-joined),answerers(;-joined)` with a header line.
void write_test_cases(const std::vector<TestCase>& cases, std::ostream& out);

struct SynthConfig {
  std::uint32_t n_clusters = 10;
  std::uint32_t n_users = 500;
  std::uint32_t n_crops = 50;
  std::uint32_t n_questions = 5000;
  double answers_per_question_mean = 3.0;
  double cross_cluster_noise = 0.1;
  std::int64_t time_span_seconds = 90LL * 24 * 3600;
  std::uint64_t seed = 42;
  void validate() const;  // throws InputError
};

// Planted assignments behind a generated log, for ground-truth checks.
struct SynthTruth {
  std::vector<std::uint32_t> user_cluster;
  std::vector<std::uint32_t> crop_cluster;
  std::vector<std::uint32_t> question_cluster;
  std::vector<double> user_weight;  // in-cluster answering propensity
};

// Planted-community generator. Crops are split round-robin over clusters,
// users uniformly; each question picks a cluster, tags 1-3 of its crops and
// collects Poisson(mean, clamped >= 1) answers from that cluster's users
// (weighted by a skewed per-user activity level) or, with probability
// cross_cluster_noise, from anyone. Deterministic in the seed.
EventLog synth_generate(const SynthConfig& cfg, SynthTruth* truth = nullptr);

}  // namespace qroute
