#include "k2sql/core/io.hpp"

#include <unistd.h>

#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>

#include "k2sql/core/error.hpp"

namespace k2sql {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

bool starts_with_array(std::string_view text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '[';
  }
  return false;
}

template <typename OnRecord, typename OnMalformed>
void scan_records(const std::filesystem::path& path, OnRecord&& on_record,
                  OnMalformed&& on_malformed) {
  const std::string text = read_file(path);
  if (starts_with_array(text)) {
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw LoadError(path.string() + ": malformed JSON array: " + e.what());
    }
    std::size_t index = 0;
    for (auto& element : doc) on_record(JsonRecord{++index, std::move(element)});
    return;
  }
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    try {
      on_record(JsonRecord{line_no, Json::parse(line)});
    } catch (const Json::parse_error& e) {
      on_malformed(line_no, std::string(e.what()));
    }
  }
}

}  // namespace

std::vector<JsonRecord> read_json_records(const std::filesystem::path& path) {
  std::vector<JsonRecord> out;
  scan_records(
      path, [&](JsonRecord r) { out.push_back(std::move(r)); },
      [&](std::size_t line, const std::string& msg) {
        throw LoadError(path.string() + ":" + std::to_string(line) + ": malformed JSON: " + msg);
      });
  return out;
}

LenientRecords read_json_records_lenient(const std::filesystem::path& path) {
  LenientRecords out;
  scan_records(
      path, [&](JsonRecord r) { out.records.push_back(std::move(r)); },
      [&](std::size_t line, const std::string& msg) { out.malformed.emplace_back(line, msg); });
  return out;
}

}  // namespace k2sql
