#include "k2sql/llm/generator.hpp"

#include <cmath>
#include <fstream>

#include "k2sql/core/hash.hpp"

namespace k2sql::llm {

void validate(const GenerationConfig& config) {
  if (!std::isfinite(config.temperature) || config.temperature < 0.0) {
    throw ValidationError("temperature must be >= 0");
  }
  if (!(config.top_p > 0.0 && config.top_p <= 1.0)) {
    throw ValidationError("top_p must lie in (0, 1]");
  }
  if (config.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

OrderedJson to_json(const GenerationConfig& config) {
  OrderedJson j;
  j["temperature"] = config.temperature;
  j["top_p"] = config.top_p;
  j["max_tokens"] = config.max_tokens;
  if (config.seed) j["seed"] = *config.seed;
  return j;
}

std::string request_key(const std::string& prompt, const GenerationConfig& config) {
  return sha256_hex(to_json(config).dump() + '\n' + prompt);
}

TableGenerator TableGenerator::from_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw LoadError(path.string() + ": malformed stub table: " + e.what());
  }
  if (!j.is_object() || !j.contains("rules") || !j.at("rules").is_array()) {
    throw LoadError(path.string() + ": stub table needs a \"rules\" array");
  }
  std::vector<Rule> rules;
  try {
    for (const auto& r : j.at("rules")) {
      rules.push_back({r.at("contains").get<std::vector<std::string>>(),
                       r.at("completion").get<std::string>()});
    }
  } catch (const Json::exception& e) {
    throw LoadError(path.string() + ": bad stub rule: " + e.what());
  }
  std::optional<std::string> fallback;
  if (j.contains("default") && !j.at("default").is_null()) {
    fallback = j.at("default").get<std::string>();
  }
  return TableGenerator(std::move(rules), std::move(fallback),
                        "table@" + sha256_hex(text).substr(0, 8));
}

TableGenerator::TableGenerator(std::vector<Rule> rules, std::optional<std::string> fallback,
                               std::string name)
    : rules_(std::move(rules)), fallback_(std::move(fallback)), name_(std::move(name)) {}

std::string TableGenerator::complete(const std::string& prompt, const GenerationConfig&) {
  for (const auto& rule : rules_) {
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return rule.completion;
  }
  if (fallback_) return *fallback_;
  throw TransportError(name_ + ": no rule matches the prompt", false);
}

RecordingGenerator::RecordingGenerator(std::shared_ptr<Generator> inner,
                                       const std::filesystem::path& path)
    : inner_(std::move(inner)), path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

std::string RecordingGenerator::complete(const std::string& prompt,
                                         const GenerationConfig& config) {
  std::string completion = inner_->complete(prompt, config);
  OrderedJson line;
  line["request_id"] = next_id_++;
  line["provider"] = inner_->name();
  line["prompt"] = prompt;
  line["config"] = to_json(config);
  line["completion"] = completion;
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << line.dump() << '\n';
  if (!out) throw Error("cannot append to recording " + path_.string());
  return completion;
}

ReplayGenerator ReplayGenerator::from_file(const std::filesystem::path& path) {
  ReplayGenerator g;
  bool first = true;
  for (const auto& rec : read_json_records(path)) {
    try {
      GenerationConfig cfg;
      const Json& c = rec.value.at("config");
      cfg.temperature = c.at("temperature").get<double>();
      cfg.top_p = c.at("top_p").get<double>();
      cfg.max_tokens = c.at("max_tokens").get<int>();
      if (c.contains("seed")) cfg.seed = c.at("seed").get<std::int64_t>();
      const auto prompt = rec.value.at("prompt").get<std::string>();
      g.by_key_[request_key(prompt, cfg)] = rec.value.at("completion").get<std::string>();
      if (first) g.provider_ = rec.value.at("provider").get<std::string>();
      first = false;
    } catch (const Json::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return g;
}

std::string ReplayGenerator::complete(const std::string& prompt, const GenerationConfig& config) {
  auto it = by_key_.find(request_key(prompt, config));
  if (it == by_key_.end()) throw TransportError("request not present in recording", false);
  return it->second;
}

CachingGenerator::CachingGenerator(std::shared_ptr<Generator> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {}

std::string CachingGenerator::complete(const std::string& prompt, const GenerationConfig& config) {
  const std::string key = sha256_hex(inner_->name() + '\n' + request_key(prompt, config));
  const auto file = dir_ / (key + ".json");
  std::error_code ec;
  if (std::filesystem::exists(file, ec)) {
    try {
      auto j = Json::parse(read_file(file));
      ++hits_;
      return j.at("completion").get<std::string>();
    } catch (const std::exception&) {
      // Unreadable entries are regenerated and overwritten.
    }
  }
  ++misses_;
  std::string completion = inner_->complete(prompt, config);
  OrderedJson j;
  j["provider"] = inner_->name();
  j["completion"] = completion;
  write_file_atomic(file, j.dump());
  return completion;
}

}  // namespace k2sql::llm
