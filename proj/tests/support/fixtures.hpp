#pragma once

#include <sqlite3.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "k2sql/core/benchmark.hpp"
#include "k2sql/core/types.hpp"

namespace k2sql::testing {

// Free-rate example in backtick form. The table name "from" is kept verbatim.
inline constexpr const char* kFreeRateSql =
    "SELECT `Free Meal Count (Ages 5-17)` / `Enrollment (Ages 5-17)` FROM from WHERE "
    "`Educational Option Type` = 'Continuation School' AND `Free Meal Count (Ages 5-17)` / "
    "`Enrollment (Ages 5-17)` IS NOT NULL ORDER BY `Free Meal Count (Ages 5-17)` / "
    "`Enrollment (Ages 5-17)` ASC LIMIT 3";
inline constexpr const char* kFreeRateContributing =
    "Eligible free rates for students aged 5-17 = `Free Meal Count (Ages 5-17)` / "
    "`Enrollment (Ages 5-17)`.";
inline constexpr const char* kFreeRateNonContributing =
    "Continuation schools refer to EdOpsCode = 'C', lowest three eligible free rate refer to "
    "MIN(`Percent (%) Eligible Free (Ages 5-17)`).";

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "k2sql-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Creates a database from a SQL script and returns its introspected schema.
inline DatabaseSchema make_db(const std::filesystem::path& file, const std::string& script,
                              const std::string& db_id = "toy") {
  std::filesystem::create_directories(file.parent_path());
  sqlite3* db = nullptr;
  if (sqlite3_open(file.c_str(), &db) != SQLITE_OK) {
    sqlite3_close(db);
    throw std::runtime_error("cannot create " + file.string());
  }
  char* err = nullptr;
  const int rc = sqlite3_exec(db, script.c_str(), nullptr, nullptr, &err);
  std::string message = err != nullptr ? err : "";
  sqlite3_free(err);
  sqlite3_close(db);
  if (rc != SQLITE_OK) throw std::runtime_error("script failed: " + message);
  return introspect_schema(db_id, file);
}

inline std::filesystem::path mini_dir() { return K2SQL_TEST_DATA_DIR "/mini"; }
inline std::filesystem::path prompts_dir() { return K2SQL_TEST_PROMPTS_DIR; }

}  // namespace k2sql::testing
