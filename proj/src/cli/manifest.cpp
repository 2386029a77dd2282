#include "k2sql/cli/manifest.hpp"

#include <chrono>
#include <ctime>

#include "k2sql/core/hash.hpp"

#ifndef K2SQL_VERSION
#define K2SQL_VERSION "dev"
#endif

namespace k2sql::cli {
namespace {

OrderedJson digests(const std::vector<std::filesystem::path>& files) {
  OrderedJson j = OrderedJson::object();
  for (const auto& f : files) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(f, ec)) continue;
    j[f.string()] = sha256_file(f);
  }
  return j;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& primary_output) {
  return primary_output.string() + ".manifest.json";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  OrderedJson j;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["inputs"] = digests(manifest.inputs);
  j["outputs"] = digests(manifest.outputs);
  j["tool_version"] = K2SQL_VERSION;
  j["timestamp"] = utc_timestamp();
  j["seed"] = manifest.seed ? OrderedJson(*manifest.seed) : OrderedJson(nullptr);
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace k2sql::cli
