#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "k2sql/core/io.hpp"
#include "k2sql/core/types.hpp"

namespace k2sql {

using SchemaRegistry = std::map<std::string, DatabaseSchema, std::less<>>;

struct Benchmark {
  std::vector<Instance> instances;
  SchemaRegistry schemas;

  const DatabaseSchema& schema_for(const Instance& instance) const;
};

// Reads the instance file (JSONL or JSON array) and introspects one database per
// referenced db_id under schemas_root.
//
// Record fields: id (falls back to question_id), question, SQL, db_id, and the
// optional evidence (becomes gold knowledge) and difficulty.
Benchmark load_benchmark(const std::filesystem::path& instances_path,
                         const std::filesystem::path& schemas_root);

// Parses one record. `where` prefixes error messages (e.g. "data.jsonl:3").
Instance parse_instance(const Json& record, const std::string& where);

// Inverse of parse_instance; absent optional fields are omitted.
Json instance_to_json(const Instance& instance);

// <root>/<db_id>/<db_id>.sqlite, falling back to <root>/<db_id>.sqlite.
std::filesystem::path locate_database(const std::filesystem::path& schemas_root,
                                      const std::string& db_id);

// Builds a schema from the database file's catalog.
DatabaseSchema introspect_schema(const std::string& db_id, const std::filesystem::path& db_file);

}  // namespace k2sql
