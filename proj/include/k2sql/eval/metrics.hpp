#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "k2sql/core/io.hpp"
#include "k2sql/core/types.hpp"

namespace k2sql::eval {

inline constexpr std::size_t kSmallSample = 30;
inline constexpr std::string_view kVesDefinition =
    "100/n * sum over matched instances of sqrt(time_gold / time_pred); unmatched count 0";

struct InstanceScore {
  std::string instance_id;
  bool matched = false;
  double time_gold = 0.0;  // seconds, meaningful when matched
  double time_pred = 0.0;
  Difficulty difficulty = Difficulty::unknown;
};

// 100 * matched / n. Throws ValidationError on an empty list.
double execution_accuracy(std::span<const InstanceScore> scores);

struct VesResult {
  double ves = 0.0;
  std::size_t n = 0;  // instances that entered the average
  std::vector<std::string> warnings;
};

// Matched instances with a non-positive time are dropped from both the sum and n,
// with a warning. Throws ValidationError on an empty list.
VesResult valid_efficiency_score(std::span<const InstanceScore> scores);

struct BucketStats {
  double ex = 0.0;
  std::size_t n = 0;
};

// EX per difficulty; empty buckets are omitted.
std::map<Difficulty, BucketStats> difficulty_breakdown(std::span<const InstanceScore> scores);

enum class Influence { assistance, misleading, inoperative, sustainable };
std::string_view to_string(Influence i);

// (baseline, assisted): (false, true) assistance, (true, false) misleading,
// (false, false) inoperative, (true, true) sustainable.
Influence classify(bool baseline, bool assisted);

struct InfluenceCounts {
  std::size_t assistance = 0;
  std::size_t misleading = 0;
  std::size_t inoperative = 0;
  std::size_t sustainable = 0;
  std::size_t total() const { return assistance + misleading + inoperative + sustainable; }
  friend bool operator==(const InfluenceCounts&, const InfluenceCounts&) = default;
};

using MatchMap = std::map<std::string, bool>;

// Throws ValidationError when the key sets differ.
InfluenceCounts classify_influence(const MatchMap& baseline, const MatchMap& assisted);

struct EvaluationReport {
  double ex = 0.0;
  double ves = 0.0;
  std::size_t n = 0;
  std::map<Difficulty, BucketStats> per_difficulty;
  std::optional<InfluenceCounts> influence;
  std::optional<double> baseline_ex;
  int timing_repetitions = 0;
  std::vector<std::string> warnings;
};

EvaluationReport build_report(std::span<const InstanceScore> scores,
                              std::span<const InstanceScore> baseline, int timing_repetitions);

OrderedJson report_to_json(const EvaluationReport& report);
// Aligned plain-text table of the same content.
std::string report_to_text(const EvaluationReport& report);

}  // namespace k2sql::eval
