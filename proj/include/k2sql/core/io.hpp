#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace k2sql {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct JsonRecord {
  std::size_t line = 0;  // 1-based line (JSONL) or 1-based element index (JSON array)
  Json value;
};

// Reads a JSONL file or a JSON array. Blank lines are skipped.
// Throws LoadError naming the offending line on malformed JSON.
std::vector<JsonRecord> read_json_records(const std::filesystem::path& path);

// Same, but malformed lines are reported instead of thrown.
struct LenientRecords {
  std::vector<JsonRecord> records;
  std::vector<std::pair<std::size_t, std::string>> malformed;
};
LenientRecords read_json_records_lenient(const std::filesystem::path& path);

// One compact JSON document per line, each terminated by '\n'.
template <typename JsonRange>
std::string to_jsonl(const JsonRange& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

}  // namespace k2sql
