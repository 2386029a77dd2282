#include "k2sql/eval/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "k2sql/core/error.hpp"

namespace k2sql::eval {
namespace {

MatchMap to_match_map(std::span<const InstanceScore> scores) {
  MatchMap m;
  for (const auto& s : scores) {
    if (!m.emplace(s.instance_id, s.matched).second) {
      throw ValidationError("duplicate instance id '" + s.instance_id + "' in scores");
    }
  }
  return m;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double execution_accuracy(std::span<const InstanceScore> scores) {
  if (scores.empty()) throw ValidationError("execution accuracy of an empty score list");
  std::size_t matched = 0;
  for (const auto& s : scores) matched += s.matched ? 1 : 0;
  return 100.0 * static_cast<double>(matched) / static_cast<double>(scores.size());
}

VesResult valid_efficiency_score(std::span<const InstanceScore> scores) {
  if (scores.empty()) throw ValidationError("VES of an empty score list");
  VesResult r;
  double sum = 0.0;
  for (const auto& s : scores) {
    if (s.matched) {
      if (!(s.time_gold > 0.0) || !(s.time_pred > 0.0)) {
        r.warnings.push_back("instance " + s.instance_id +
                             " has a non-positive execution time and is excluded from VES");
        continue;
      }
      sum += std::sqrt(s.time_gold / s.time_pred);
    }
    ++r.n;
  }
  r.ves = r.n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(r.n);
  return r;
}

std::map<Difficulty, BucketStats> difficulty_breakdown(std::span<const InstanceScore> scores) {
  std::map<Difficulty, std::pair<std::size_t, std::size_t>> counts;  // matched, n
  for (const auto& s : scores) {
    auto& c = counts[s.difficulty];
    c.first += s.matched ? 1 : 0;
    ++c.second;
  }
  std::map<Difficulty, BucketStats> out;
  for (const auto& [d, c] : counts) {
    out[d] = {100.0 * static_cast<double>(c.first) / static_cast<double>(c.second), c.second};
  }
  return out;
}

std::string_view to_string(Influence i) {
  switch (i) {
    case Influence::assistance:
      return "assistance";
    case Influence::misleading:
      return "misleading";
    case Influence::inoperative:
      return "inoperative";
    case Influence::sustainable:
      return "sustainable";
  }
  return "?";
}

Influence classify(bool baseline, bool assisted) {
  if (baseline) return assisted ? Influence::sustainable : Influence::misleading;
  return assisted ? Influence::assistance : Influence::inoperative;
}

InfluenceCounts classify_influence(const MatchMap& baseline, const MatchMap& assisted) {
  if (baseline.size() != assisted.size()) {
    throw ValidationError("baseline and assisted runs cover different instances");
  }
  InfluenceCounts c;
  for (const auto& [id, base] : baseline) {
    auto it = assisted.find(id);
    if (it == assisted.end()) {
      throw ValidationError("instance '" + id + "' is missing from the assisted run");
    }
    switch (classify(base, it->second)) {
      case Influence::assistance:
        ++c.assistance;
        break;
      case Influence::misleading:
        ++c.misleading;
        break;
      case Influence::inoperative:
        ++c.inoperative;
        break;
      case Influence::sustainable:
        ++c.sustainable;
        break;
    }
  }
  return c;
}

EvaluationReport build_report(std::span<const InstanceScore> scores,
                              std::span<const InstanceScore> baseline, int timing_repetitions) {
  EvaluationReport r;
  r.n = scores.size();
  r.ex = execution_accuracy(scores);
  auto ves = valid_efficiency_score(scores);
  r.ves = ves.ves;
  r.warnings = std::move(ves.warnings);
  r.per_difficulty = difficulty_breakdown(scores);
  r.timing_repetitions = timing_repetitions;
  if (!baseline.empty()) {
    r.influence = classify_influence(to_match_map(baseline), to_match_map(scores));
    r.baseline_ex = execution_accuracy(baseline);
  }
  if (r.n < kSmallSample) {
    r.warnings.push_back("small sample: n = " + std::to_string(r.n) + " < " +
                         std::to_string(kSmallSample));
  }
  return r;
}

OrderedJson report_to_json(const EvaluationReport& report) {
  OrderedJson j;
  j["n"] = report.n;
  j["ex"] = report.ex;
  j["ves"] = report.ves;
  OrderedJson buckets = OrderedJson::object();
  for (const auto& [d, b] : report.per_difficulty) {
    buckets[std::string(to_string(d))] = {{"ex", b.ex}, {"n", b.n}};
  }
  j["per_difficulty"] = std::move(buckets);
  if (report.influence) {
    const auto& c = *report.influence;
    j["baseline_ex"] = *report.baseline_ex;
    j["influence"] = {{"assistance", c.assistance},
                      {"misleading", c.misleading},
                      {"inoperative", c.inoperative},
                      {"sustainable", c.sustainable}};
  }
  j["metadata"] = {{"ves_definition", kVesDefinition},
                   {"timing_repetitions", report.timing_repetitions},
                   {"timing_warmup_runs", 1}};
  j["warnings"] = report.warnings;
  return j;
}

std::string report_to_text(const EvaluationReport& report) {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("n", std::to_string(report.n));
  rows.emplace_back("EX", fixed(report.ex));
  rows.emplace_back("VES", fixed(report.ves));
  for (const auto& [d, b] : report.per_difficulty) {
    rows.emplace_back("EX " + std::string(to_string(d)),
                      fixed(b.ex) + " (n=" + std::to_string(b.n) + ")");
  }
  if (report.influence) {
    const auto& c = *report.influence;
    rows.emplace_back("EX baseline", fixed(*report.baseline_ex));
    rows.emplace_back("assistance", std::to_string(c.assistance));
    rows.emplace_back("misleading", std::to_string(c.misleading));
    rows.emplace_back("inoperative", std::to_string(c.inoperative));
    rows.emplace_back("sustainable", std::to_string(c.sustainable));
  }
  std::size_t width = 0;
  for (const auto& [k, _] : rows) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k + std::string(width - k.size() + 2, ' ') + v + '\n';
  }
  for (const auto& w : report.warnings) out += "warning: " + w + '\n';
  return out;
}

}  // namespace k2sql::eval
