#include "k2sql/objective/objective.hpp"

#include <algorithm>
#include <cmath>

#include "k2sql/core/error.hpp"

namespace k2sql::objective {
namespace {

constexpr double kLogprobTolerance = 1e-6;

void check_aligned(const LogprobSequence& target, const LogprobSequence& reference,
                   const char* side) {
  if (target.token_ids != reference.token_ids) {
    throw ValidationError(std::string(side) + " target and reference token ids differ");
  }
}

// Loss as a function of the four side sums; the gradient check perturbs these.
struct SideSums {
  double chosen_target;
  double chosen_reference;
  double rejected_target;
  double rejected_reference;
};

double loss_from_sums(const SideSums& s, double beta) {
  const double x =
      beta * ((s.chosen_target - s.chosen_reference) - (s.rejected_target - s.rejected_reference));
  return softplus(-x);
}

LogprobSequence parse_side(const Json& j, const char* key, const char* which) {
  if (!j.contains(key) || !j.at(key).is_object()) {
    throw ValidationError(std::string("missing object '") + key + "'");
  }
  const Json& side = j.at(key);
  LogprobSequence seq;
  seq.token_ids = side.at("tokens").get<std::vector<std::int64_t>>();
  seq.logprobs = side.at(which).get<std::vector<double>>();
  return seq;
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= 1e-8 && epsilon <= 1e-3)) {
    throw ValidationError("epsilon must lie in [1e-8, 1e-3]");
  }
}

}  // namespace

void validate(const LogprobSequence& seq) {
  if (seq.token_ids.size() != seq.logprobs.size()) {
    throw ValidationError("token_ids and logprobs differ in length");
  }
  for (double lp : seq.logprobs) {
    if (!std::isfinite(lp)) throw ValidationError("logprob is not finite");
    if (lp > kLogprobTolerance) throw ValidationError("logprob is positive");
  }
}

void validate(const DpoRecord& record) {
  validate(record.chosen_target);
  validate(record.chosen_reference);
  validate(record.rejected_target);
  validate(record.rejected_reference);
  check_aligned(record.chosen_target, record.chosen_reference, "chosen");
  check_aligned(record.rejected_target, record.rejected_reference, "rejected");
  if (!std::isfinite(record.beta) || record.beta < 0.0) {
    throw ValidationError("beta must be finite and non-negative");
  }
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double sft_loss(const LogprobSequence& gold, Reduction reduction) {
  validate(gold);
  if (gold.logprobs.empty()) throw ValidationError("sft_loss of an empty sequence");
  const double loss = -stable_sum(gold.logprobs);
  if (reduction == Reduction::mean) return loss / static_cast<double>(gold.logprobs.size());
  return loss;
}

double implicit_reward(const LogprobSequence& target, const LogprobSequence& reference,
                       RewardMode mode) {
  validate(target);
  validate(reference);
  check_aligned(target, reference, "reward");
  double r = stable_sum(target.logprobs) - stable_sum(reference.logprobs);
  if (mode == RewardMode::length_normalized && !target.logprobs.empty()) {
    r /= static_cast<double>(target.logprobs.size());
  }
  return r;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dpo_margin(const DpoRecord& record, RewardMode mode) {
  validate(record);
  const double rw = implicit_reward(record.chosen_target, record.chosen_reference, mode);
  const double rl = implicit_reward(record.rejected_target, record.rejected_reference, mode);
  return record.beta * (rw - rl);
}

double dpo_loss(const DpoRecord& record, RewardMode mode) {
  return softplus(-dpo_margin(record, mode));
}

GradientReport dpo_gradient_check(const DpoRecord& record, double epsilon) {
  check_epsilon(epsilon);
  validate(record);
  GradientReport report;
  report.margin = dpo_margin(record);
  report.loss = softplus(-report.margin);
  const double g = record.beta * sigmoid(-report.margin);
  report.grad_chosen_target = -g;
  report.grad_chosen_reference = g;
  report.grad_rejected_target = g;
  report.grad_rejected_reference = -g;

  const SideSums base{
      stable_sum(record.chosen_target.logprobs), stable_sum(record.chosen_reference.logprobs),
      stable_sum(record.rejected_target.logprobs), stable_sum(record.rejected_reference.logprobs)};
  const std::pair<const LogprobSequence*, double SideSums::*> sides[] = {
      {&record.chosen_target, &SideSums::chosen_target},
      {&record.chosen_reference, &SideSums::chosen_reference},
      {&record.rejected_target, &SideSums::rejected_target},
      {&record.rejected_reference, &SideSums::rejected_reference},
  };
  const double analytic[] = {report.grad_chosen_target, report.grad_chosen_reference,
                             report.grad_rejected_target, report.grad_rejected_reference};
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& [seq, member] = sides[s];
    std::vector<double> perturbed = seq->logprobs;
    for (std::size_t i = 0; i < perturbed.size(); ++i) {
      const double original = perturbed[i];
      SideSums plus = base;
      SideSums minus = base;
      perturbed[i] = original + epsilon;
      plus.*member = stable_sum(perturbed);
      perturbed[i] = original - epsilon;
      minus.*member = stable_sum(perturbed);
      perturbed[i] = original;
      const double fd = (loss_from_sums(plus, record.beta) - loss_from_sums(minus, record.beta)) /
                        (2.0 * epsilon);
      report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(fd - analytic[s]));
      ++report.checked;
    }
  }
  return report;
}

LogprobRecord parse_logprob_record(const Json& j) {
  if (!j.is_object()) throw ValidationError("record is not an object");
  LogprobRecord r;
  try {
    const Json& id = j.at("instance_id");
    r.instance_id = id.is_string() ? id.get<std::string>() : id.dump();
    r.record.beta = j.value("beta", kDefaultBeta);
    r.record.chosen_target = parse_side(j, "chosen", "target_logprobs");
    r.record.chosen_reference = parse_side(j, "chosen", "reference_logprobs");
    r.record.rejected_target = parse_side(j, "rejected", "target_logprobs");
    r.record.rejected_reference = parse_side(j, "rejected", "reference_logprobs");
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed logprob record: ") + e.what());
  }
  if (!(r.record.beta > 0.0)) throw ValidationError("beta must be positive");
  validate(r.record);
  return r;
}

OrderedJson logprob_record_to_json(const LogprobRecord& r) {
  auto side = [](const LogprobSequence& target, const LogprobSequence& reference) {
    OrderedJson s;
    s["tokens"] = target.token_ids;
    s["target_logprobs"] = target.logprobs;
    s["reference_logprobs"] = reference.logprobs;
    return s;
  };
  OrderedJson j;
  j["instance_id"] = r.instance_id;
  j["beta"] = r.record.beta;
  j["chosen"] = side(r.record.chosen_target, r.record.chosen_reference);
  j["rejected"] = side(r.record.rejected_target, r.record.rejected_reference);
  return j;
}

RecordResult verify_record(const LogprobRecord& r, const VerifyOptions& options) {
  RecordResult out;
  out.instance_id = r.instance_id;
  out.beta = r.record.beta;
  out.sft_loss = r.record.chosen_reference.logprobs.empty()
                     ? 0.0
                     : sft_loss(r.record.chosen_reference, options.sft_reduction);
  out.gradient = dpo_gradient_check(r.record, options.epsilon);
  out.dpo_loss =
      options.reward == RewardMode::sum ? out.gradient.loss : dpo_loss(r.record, options.reward);
  return out;
}

std::vector<RecordResult> verify_records(std::span<const LogprobRecord> records,
                                         const VerifyOptions& options, int workers) {
  check_epsilon(options.epsilon);
  std::vector<RecordResult> out(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = verify_record(records[static_cast<std::size_t>(i)], options);
  }
  return out;
}

std::vector<RecordResult> verify_records_serial(std::span<const LogprobRecord> records,
                                                const VerifyOptions& options) {
  check_epsilon(options.epsilon);
  std::vector<RecordResult> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(verify_record(r, options));
  return out;
}

OrderedJson record_result_to_json(const RecordResult& r) {
  OrderedJson j;
  j["instance_id"] = r.instance_id;
  j["beta"] = r.beta;
  j["sft_loss"] = r.sft_loss;
  j["dpo_margin"] = r.gradient.margin;
  j["dpo_loss"] = r.dpo_loss;
  OrderedJson g;
  g["chosen_target"] = r.gradient.grad_chosen_target;
  g["chosen_reference"] = r.gradient.grad_chosen_reference;
  g["rejected_target"] = r.gradient.grad_rejected_target;
  g["rejected_reference"] = r.gradient.grad_rejected_reference;
  j["gradient"] = std::move(g);
  j["max_abs_deviation"] = r.gradient.max_abs_deviation;
  j["checked_logprobs"] = r.gradient.checked;
  return j;
}

VerificationSummary summarize(std::span<const RecordResult> results) {
  VerificationSummary s;
  s.count = results.size();
  if (results.empty()) return s;
  std::vector<double> dpo;
  std::vector<double> sft;
  for (const auto& r : results) {
    dpo.push_back(r.dpo_loss);
    sft.push_back(r.sft_loss);
    s.max_abs_deviation = std::max(s.max_abs_deviation, r.gradient.max_abs_deviation);
  }
  const auto n = static_cast<double>(results.size());
  s.mean_dpo_loss = stable_sum(dpo) / n;
  s.mean_sft_loss = stable_sum(sft) / n;
  return s;
}

}  // namespace k2sql::objective
