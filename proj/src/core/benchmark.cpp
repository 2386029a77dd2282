#include "k2sql/core/benchmark.hpp"

#include <system_error>

#include "k2sql/core/error.hpp"
#include "k2sql/core/knowledge.hpp"
#include "k2sql/core/sqlite.hpp"

namespace k2sql {

const DatabaseSchema& Benchmark::schema_for(const Instance& instance) const {
  auto it = schemas.find(instance.db_id);
  if (it == schemas.end()) throw ValidationError("no schema for db_id '" + instance.db_id + "'");
  return it->second;
}

namespace {

std::string required_string(const Json& record, const char* key, const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    throw LoadError(where + ": missing field '" + key + "'");
  }
  if (!it->is_string()) throw LoadError(where + ": field '" + key + "' must be a string");
  std::string value = it->get<std::string>();
  if (value.empty()) throw LoadError(where + ": field '" + key + "' is empty");
  return value;
}

std::string record_id(const Json& record, const std::string& where) {
  if (auto it = record.find("id"); it != record.end() && !it->is_null()) {
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw LoadError(where + ": field 'id' must be a string");
  }
  if (auto it = record.find("question_id"); it != record.end() && !it->is_null()) {
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    if (it->is_number()) return it->dump();
  }
  throw LoadError(where + ": missing field 'id' (or 'question_id')");
}

}  // namespace

Instance parse_instance(const Json& record, const std::string& where) {
  if (!record.is_object()) throw LoadError(where + ": record is not a JSON object");
  Instance inst;
  inst.id = record_id(record, where);
  if (inst.id.empty()) throw LoadError(where + ": field 'id' is empty");
  inst.question = required_string(record, "question", where);
  inst.gold_sql = required_string(record, "SQL", where);
  inst.db_id = required_string(record, "db_id", where);
  if (auto it = record.find("evidence"); it != record.end() && !it->is_null()) {
    if (!it->is_string()) throw LoadError(where + ": field 'evidence' must be a string");
    inst.gold_knowledge = decompose_knowledge(it->get<std::string>());
  }
  if (auto it = record.find("difficulty"); it != record.end() && it->is_string()) {
    inst.difficulty = parse_difficulty(it->get<std::string>());
  }
  return inst;
}

Json instance_to_json(const Instance& instance) {
  Json j;
  j["id"] = instance.id;
  j["question"] = instance.question;
  j["SQL"] = instance.gold_sql;
  j["db_id"] = instance.db_id;
  if (instance.gold_knowledge) j["evidence"] = instance.gold_knowledge->text;
  if (instance.difficulty != Difficulty::unknown) {
    j["difficulty"] = std::string(to_string(instance.difficulty));
  }
  return j;
}

std::filesystem::path locate_database(const std::filesystem::path& schemas_root,
                                      const std::string& db_id) {
  std::error_code ec;
  auto nested = schemas_root / db_id / (db_id + ".sqlite");
  if (std::filesystem::is_regular_file(nested, ec)) return nested;
  auto flat = schemas_root / (db_id + ".sqlite");
  if (std::filesystem::is_regular_file(flat, ec)) return flat;
  throw LoadError("unknown db_id '" + db_id + "': no database file under " + schemas_root.string());
}

DatabaseSchema introspect_schema(const std::string& db_id, const std::filesystem::path& db_file) {
  DatabaseSchema schema;
  schema.db_id = db_id;
  schema.db_file_path = db_file;
  try {
    auto conn = Connection::open_read_only(db_file);
    Statement tables(conn,
                     "SELECT name FROM sqlite_master WHERE type = 'table' "
                     "AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    while (tables.step()) schema.tables.push_back(Table{tables.column_text(0), {}});
    for (auto& table : schema.tables) {
      Statement cols(conn, "SELECT name, type FROM pragma_table_info(?1) ORDER BY cid");
      cols.bind_text(1, table.name);
      while (cols.step()) {
        table.columns.push_back(Column{cols.column_text(0), cols.column_text(1), std::nullopt});
      }
    }
  } catch (const LoadError&) {
    throw;
  } catch (const Error& e) {
    throw LoadError("cannot read catalog of " + db_file.string() + ": " + e.what());
  }
  try {
    validate(schema);
  } catch (const ValidationError& e) {
    throw LoadError(db_file.string() + ": " + e.what());
  }
  return schema;
}

Benchmark load_benchmark(const std::filesystem::path& instances_path,
                         const std::filesystem::path& schemas_root) {
  Benchmark bench;
  for (const auto& rec : read_json_records(instances_path)) {
    bench.instances.push_back(
        parse_instance(rec.value, instances_path.string() + ":" + std::to_string(rec.line)));
  }
  for (const auto& inst : bench.instances) {
    if (bench.schemas.contains(inst.db_id)) continue;
    auto file = locate_database(schemas_root, inst.db_id);
    bench.schemas.emplace(inst.db_id, introspect_schema(inst.db_id, file));
  }
  return bench;
}

}  // namespace k2sql
