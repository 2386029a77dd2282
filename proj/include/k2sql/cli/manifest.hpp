#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "k2sql/core/io.hpp"

namespace k2sql::cli {

// Record of one command run, written next to its primary output.
struct RunManifest {
  std::string command;
  OrderedJson config = OrderedJson::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::optional<std::int64_t> seed;
};

std::filesystem::path manifest_path(const std::filesystem::path& primary_output);

// Hashes every input and output file at call time and writes the manifest
// atomically. Directories among the inputs are skipped.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

std::string utc_timestamp();

}  // namespace k2sql::cli
