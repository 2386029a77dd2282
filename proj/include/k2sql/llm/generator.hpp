#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "k2sql/core/error.hpp"
#include "k2sql/core/io.hpp"

namespace k2sql::llm {

struct GenerationConfig {
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 4096;
  std::optional<std::int64_t> seed;
};

void validate(const GenerationConfig& config);
OrderedJson to_json(const GenerationConfig& config);

class GenerationError : public Error {
 public:
  using Error::Error;
};

// Failure talking to a provider. Transient failures (rate limits, 5xx, dropped
// connections) are eligible for retry.
class TransportError : public GenerationError {
 public:
  TransportError(const std::string& message, bool transient, int status = 0)
      : GenerationError(message), transient_(transient), status_(status) {}
  bool transient() const { return transient_; }
  int status() const { return status_; }

 private:
  bool transient_;
  int status_;
};

// Text completion capability. Implementations must allow concurrent complete() calls.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const std::string& prompt, const GenerationConfig& config) = 0;
};

// Always returns the same text.
class EchoGenerator final : public Generator {
 public:
  explicit EchoGenerator(std::string text) : text_(std::move(text)) {}
  std::string name() const override { return "echo"; }
  std::string complete(const std::string&, const GenerationConfig&) override { return text_; }

 private:
  std::string text_;
};

// Rule table loaded from JSON:
//   {"rules": [{"contains": ["...", ...], "completion": "..."}], "default": "..."}
// The first rule whose every needle occurs in the prompt wins. Without a match and
// without a default, complete() throws a non-transient GenerationError.
class TableGenerator final : public Generator {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::string completion;
  };

  static TableGenerator from_file(const std::filesystem::path& path);
  TableGenerator(std::vector<Rule> rules, std::optional<std::string> fallback, std::string name);

  std::string name() const override { return name_; }
  std::string complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::vector<Rule> rules_;
  std::optional<std::string> fallback_;
  std::string name_;
};

// Appends one JSONL line per completed request:
// {request_id, provider, prompt, config, completion}
class RecordingGenerator final : public Generator {
 public:
  RecordingGenerator(std::shared_ptr<Generator> inner, const std::filesystem::path& path);
  std::string name() const override { return inner_->name(); }
  std::string complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::shared_ptr<Generator> inner_;
  std::filesystem::path path_;
  std::mutex mutex_;
  std::atomic<std::uint64_t> next_id_{0};
};

// Serves completions from a recording; a request absent from it is an error, so a
// replayed session never reaches the network. Reports the recorded provider name.
class ReplayGenerator final : public Generator {
 public:
  static ReplayGenerator from_file(const std::filesystem::path& path);
  std::string name() const override { return provider_; }
  std::string complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::string provider_ = "replay";
  std::map<std::string, std::string> by_key_;
};

// Key for recordings and caches: digest over prompt and config.
std::string request_key(const std::string& prompt, const GenerationConfig& config);

// Content-addressed completion cache, one JSON file per request under dir.
// The key covers provider name, config and prompt.
class CachingGenerator final : public Generator {
 public:
  CachingGenerator(std::shared_ptr<Generator> inner, std::filesystem::path dir);
  std::string name() const override { return inner_->name(); }
  std::string complete(const std::string& prompt, const GenerationConfig& config) override;

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  std::shared_ptr<Generator> inner_;
  std::filesystem::path dir_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace k2sql::llm
