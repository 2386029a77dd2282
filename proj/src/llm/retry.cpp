#include "k2sql/llm/retry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace k2sql::llm {

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry,
                                        std::uint64_t jitter_state) {
  const double base = static_cast<double>(policy.base_backoff.count());
  const double cap = static_cast<double>(policy.max_backoff.count());
  const double raw = std::min(cap, base * std::pow(2.0, std::max(0, retry - 1)));
  std::mt19937_64 rng(jitter_state);
  std::uniform_real_distribution<double> jitter(0.5, 1.0);
  return std::chrono::milliseconds(static_cast<std::int64_t>(raw * jitter(rng)));
}

std::string call_with_retry(const std::function<std::string()>& fn, const RetryPolicy& policy,
                            const Sleeper& sleep) {
  if (policy.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  std::vector<std::string> trace;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError& e) {
      if (!e.transient()) throw;
      trace.push_back("attempt " + std::to_string(attempt) + ": " + e.what());
      if (attempt >= policy.max_attempts) {
        throw RetryExhausted("gave up after " + std::to_string(attempt) + " attempts: " + e.what(),
                             std::move(trace));
      }
    }
    const auto delay = backoff_delay(policy, attempt, policy.jitter_seed + attempt);
    if (sleep) {
      sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }
}

}  // namespace k2sql::llm
