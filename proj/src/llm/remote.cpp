#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "k2sql/llm/remote.hpp"

#include <cstdlib>

#include "httplib.h"

namespace k2sql::llm {
namespace {

bool transient_status(int status) { return status == 429 || status >= 500; }

Json post_json(const std::string& url, const std::string& body, const RemoteConfig& cfg) {
  const auto [base, path] = split_url(url);
  httplib::Client client(base);
  client.set_connection_timeout(cfg.timeout);
  client.set_read_timeout(cfg.timeout);
  client.set_write_timeout(cfg.timeout);
  httplib::Headers headers;
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw TransportError(url + ": " + httplib::to_string(res.error()), true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(
        url + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
        transient_status(res->status), res->status);
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception& e) {
    throw TransportError(url + ": malformed JSON reply: " + e.what(), false, res->status);
  }
}

}  // namespace

std::string api_key_from_env() {
  const char* key = std::getenv("K2SQL_API_KEY");
  return key == nullptr ? std::string() : std::string(key);
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || scheme == 0) {
    throw ValidationError("endpoint url needs a scheme: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

RemoteGenerator::RemoteGenerator(RemoteConfig config)
    : config_(std::move(config)), slots_(std::max(1, config_.max_in_flight)) {
  if (config_.endpoint_url.empty()) throw ValidationError("remote provider needs endpoint_url");
  if (config_.model_name.empty()) throw ValidationError("remote provider needs model_name");
  split_url(config_.endpoint_url);
}

std::string RemoteGenerator::attempt(const std::string& body) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};
  const Json reply = post_json(config_.endpoint_url, body, config_);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw TransportError("reply has no completion text: " + std::string(e.what()), false);
  }
}

std::string RemoteGenerator::complete(const std::string& prompt, const GenerationConfig& config) {
  validate(config);
  OrderedJson body;
  body["model"] = config_.model_name;
  body["messages"] = OrderedJson::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = config.temperature;
  body["top_p"] = config.top_p;
  body["max_tokens"] = config.max_tokens;
  if (config.seed) body["seed"] = *config.seed;
  const std::string payload = body.dump();
  return call_with_retry([&] { return attempt(payload); }, config_.retry);
}

RemoteEmbedder::RemoteEmbedder(RemoteConfig config) : config_(std::move(config)) {
  if (config_.embedding_url.empty()) throw ValidationError("remote embedder needs embedding_url");
  if (config_.embedding_model.empty()) {
    throw ValidationError("remote embedder needs embedding_model");
  }
  split_url(config_.embedding_url);
}

std::uint64_t RemoteEmbedder::dimension() const {
  std::lock_guard lock(mutex_);
  return dimension_;
}

schema_link::Embedding RemoteEmbedder::embed(std::string_view text) const {
  std::lock_guard lock(mutex_);
  if (auto it = memo_.find(text); it != memo_.end()) return it->second;
  OrderedJson body;
  body["model"] = config_.embedding_model;
  body["input"] = std::string(text);
  const std::string payload = body.dump();
  const std::string raw = call_with_retry(
      [&] { return post_json(config_.embedding_url, payload, config_).dump(); }, config_.retry);
  std::vector<double> values;
  try {
    values = Json::parse(raw).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw TransportError("reply has no embedding: " + std::string(e.what()), false);
  }
  if (values.empty()) throw TransportError("empty embedding", false);
  if (dimension_ != 0 && dimension_ != values.size()) {
    throw TransportError("embedding dimension changed between requests", false);
  }
  dimension_ = values.size();
  schema_link::Embedding e;
  for (std::size_t i = 0; i < values.size(); ++i) e.entries.emplace_back(i, values[i]);
  memo_.emplace(std::string(text), e);
  return e;
}

}  // namespace k2sql::llm
