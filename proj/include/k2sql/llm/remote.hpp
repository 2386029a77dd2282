#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include "k2sql/llm/generator.hpp"
#include "k2sql/llm/retry.hpp"
#include "k2sql/schema_link/embedder.hpp"

namespace k2sql::llm {

struct RemoteConfig {
  std::string endpoint_url;  // full chat-completions URL
  std::string model_name;
  std::string api_key;  // sent as a bearer token when non-empty
  std::string embedding_url;
  std::string embedding_model;
  std::chrono::seconds timeout{120};
  int max_in_flight = 4;
  RetryPolicy retry;
};

// Reads K2SQL_API_KEY from the environment; empty when unset.
std::string api_key_from_env();

// Splits "http[s]://host[:port]/path" into ("http[s]://host[:port]", "/path").
std::pair<std::string, std::string> split_url(const std::string& url);

// Chat-completion style JSON over HTTP:
//   POST {model, messages: [{role: "user", content}], temperature, top_p, max_tokens, seed?}
//   reply choices[0].message.content
// 429, 5xx and connection failures are transient and retried per the policy.
class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(RemoteConfig config);
  std::string name() const override { return "remote:" + config_.model_name; }
  std::string complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::string attempt(const std::string& body);

  RemoteConfig config_;
  std::counting_semaphore<> slots_;
};

// Embeddings endpoint: POST {model, input} -> data[0].embedding. Declares itself
// single-flight and memoises vectors so repeated descriptors cost one request.
class RemoteEmbedder final : public schema_link::Embedder {
 public:
  explicit RemoteEmbedder(RemoteConfig config);
  std::string name() const override { return "remote:" + config_.embedding_model; }
  std::uint64_t dimension() const override;
  schema_link::Embedding embed(std::string_view text) const override;
  bool concurrent_safe() const override { return false; }

 private:
  RemoteConfig config_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, schema_link::Embedding, std::less<>> memo_;
  mutable std::uint64_t dimension_ = 0;
};

}  // namespace k2sql::llm
