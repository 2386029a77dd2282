#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace k2sql {

enum class Difficulty { simple, moderate, challenging, unknown };

std::string_view to_string(Difficulty d);
// Case-insensitive; anything unrecognised (including "") maps to unknown.
Difficulty parse_difficulty(std::string_view text);

struct Column {
  std::string name;
  std::string declared_type;
  std::optional<std::string> description;
};

struct Table {
  std::string name;
  std::vector<Column> columns;

  const Column* find_column(std::string_view column_name) const;
};

struct DatabaseSchema {
  std::string db_id;
  std::vector<Table> tables;
  std::filesystem::path db_file_path;

  const Table* find_table(std::string_view table_name) const;
  std::size_t column_count() const;
};

// Throws ValidationError when names are empty or duplicated, or a table has no columns.
void validate(const DatabaseSchema& schema);

// Free-text knowledge K together with its sub-knowledge fragments k_1, k_2, ...
struct Knowledge {
  std::string text;
  std::vector<std::string> sub_knowledge;

  bool empty() const { return text.empty(); }
  friend bool operator==(const Knowledge&, const Knowledge&) = default;
};

struct Instance {
  std::string id;
  std::string question;
  std::string db_id;
  std::string gold_sql;
  std::optional<Knowledge> gold_knowledge;
  Difficulty difficulty = Difficulty::unknown;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// One line per table: "table <name>(<col1>, <col2>, ...)" in schema order.
std::string render_schema_text(const DatabaseSchema& schema);

}  // namespace k2sql
