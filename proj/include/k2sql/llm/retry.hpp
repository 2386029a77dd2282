#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "k2sql/llm/generator.hpp"

namespace k2sql::llm {

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  std::uint64_t jitter_seed = 0;
};

// Thrown when every attempt failed transiently; trace holds one message per attempt.
class RetryExhausted : public GenerationError {
 public:
  RetryExhausted(const std::string& message, std::vector<std::string> trace)
      : GenerationError(message), trace_(std::move(trace)) {}
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  std::vector<std::string> trace_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped at
// max_backoff, scaled by a jitter factor in [0.5, 1.0).
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry,
                                        std::uint64_t jitter_state);

// Calls fn until it succeeds. TransportErrors marked transient are retried with
// backoff; any other exception propagates immediately.
std::string call_with_retry(const std::function<std::string()>& fn, const RetryPolicy& policy,
                            const Sleeper& sleep = {});

}  // namespace k2sql::llm
