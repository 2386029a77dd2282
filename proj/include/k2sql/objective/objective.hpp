#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "k2sql/core/io.hpp"

namespace k2sql::objective {

inline constexpr double kDefaultBeta = 0.1;

struct LogprobSequence {
  std::vector<std::int64_t> token_ids;
  std::vector<double> logprobs;  // natural log
};

// Throws ValidationError unless lengths agree and every logprob is finite and <= 1e-6.
void validate(const LogprobSequence& seq);

// target = the policy being optimised, reference = the frozen SFT policy.
struct DpoRecord {
  LogprobSequence chosen_target;
  LogprobSequence chosen_reference;
  LogprobSequence rejected_target;
  LogprobSequence rejected_reference;
  double beta = kDefaultBeta;
};

// Sequence checks plus token alignment within each side. beta must be finite and
// non-negative; parse_logprob_record additionally requires beta > 0.
void validate(const DpoRecord& record);

enum class Reduction { sum, mean };
enum class RewardMode { sum, length_normalized };

// Compensated (Neumaier) sum.
double stable_sum(std::span<const double> values);

// Token-level cross-entropy of the gold tokens. Throws ValidationError when empty.
double sft_loss(const LogprobSequence& gold, Reduction reduction = Reduction::sum);

// log(pi_target / pi_reference) over one sequence. Throws ValidationError when the
// two sequences are not aligned on the same tokens.
double implicit_reward(const LogprobSequence& target, const LogprobSequence& reference,
                       RewardMode mode = RewardMode::sum);

// log(1 + exp(z)) without overflow.
double softplus(double z);
double sigmoid(double z);

// x = beta * (R_chosen - R_rejected).
double dpo_margin(const DpoRecord& record, RewardMode mode = RewardMode::sum);
// -log sigmoid(x) = softplus(-x)
double dpo_loss(const DpoRecord& record, RewardMode mode = RewardMode::sum);

struct GradientReport {
  double margin = 0.0;
  double loss = 0.0;
  // Analytic derivative of the loss with respect to one token logprob on each side.
  double grad_chosen_target = 0.0;
  double grad_chosen_reference = 0.0;
  double grad_rejected_target = 0.0;
  double grad_rejected_reference = 0.0;
  double max_abs_deviation = 0.0;  // against central differences, every logprob
  std::size_t checked = 0;
};

// Central finite differences of dpo_loss with step epsilon in [1e-8, 1e-3],
// compared per logprob against the analytic gradient (sum rewards).
GradientReport dpo_gradient_check(const DpoRecord& record, double epsilon);

// {instance_id, beta?, chosen: {tokens, target_logprobs, reference_logprobs}, rejected: {...}}
struct LogprobRecord {
  std::string instance_id;
  DpoRecord record;
};
LogprobRecord parse_logprob_record(const Json& j);
OrderedJson logprob_record_to_json(const LogprobRecord& r);

struct VerifyOptions {
  double epsilon = 1e-5;
  Reduction sft_reduction = Reduction::sum;
  // Applies to the reported loss; the gradient check always uses sum rewards.
  RewardMode reward = RewardMode::sum;
};

struct RecordResult {
  std::string instance_id;
  double beta = 0.0;
  double sft_loss = 0.0;  // over the chosen reference sequence
  double dpo_loss = 0.0;
  GradientReport gradient;
};

RecordResult verify_record(const LogprobRecord& r, const VerifyOptions& options);
// Parallel over records (OpenMP); results keep input order.
std::vector<RecordResult> verify_records(std::span<const LogprobRecord> records,
                                         const VerifyOptions& options, int workers);
// Serial reference for verify_records.
std::vector<RecordResult> verify_records_serial(std::span<const LogprobRecord> records,
                                                const VerifyOptions& options);

OrderedJson record_result_to_json(const RecordResult& r);

struct VerificationSummary {
  std::size_t count = 0;
  double mean_dpo_loss = 0.0;
  double mean_sft_loss = 0.0;
  double max_abs_deviation = 0.0;
};
// Batch aggregation is the mean over records.
VerificationSummary summarize(std::span<const RecordResult> results);

}  // namespace k2sql::objective
