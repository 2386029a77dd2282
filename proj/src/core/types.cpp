#include "k2sql/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "k2sql/core/error.hpp"

namespace k2sql {

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::simple:
      return "simple";
    case Difficulty::moderate:
      return "moderate";
    case Difficulty::challenging:
      return "challenging";
    case Difficulty::unknown:
      break;
  }
  return "unknown";
}

Difficulty parse_difficulty(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "simple") return Difficulty::simple;
  if (lowered == "moderate") return Difficulty::moderate;
  if (lowered == "challenging") return Difficulty::challenging;
  return Difficulty::unknown;
}

const Column* Table::find_column(std::string_view column_name) const {
  for (const auto& c : columns) {
    if (c.name == column_name) return &c;
  }
  return nullptr;
}

const Table* DatabaseSchema::find_table(std::string_view table_name) const {
  for (const auto& t : tables) {
    if (t.name == table_name) return &t;
  }
  return nullptr;
}

std::size_t DatabaseSchema::column_count() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.columns.size();
  return n;
}

void validate(const DatabaseSchema& schema) {
  if (schema.db_id.empty()) throw ValidationError("schema has an empty db_id");
  if (schema.tables.empty()) {
    throw ValidationError("schema '" + schema.db_id + "' has no tables");
  }
  std::set<std::string> table_names;
  for (const auto& table : schema.tables) {
    if (table.name.empty()) {
      throw ValidationError("schema '" + schema.db_id + "' has a table with an empty name");
    }
    if (!table_names.insert(table.name).second) {
      throw ValidationError("schema '" + schema.db_id + "' has duplicate table '" + table.name +
                            "'");
    }
    if (table.columns.empty()) {
      throw ValidationError("table '" + table.name + "' has no columns");
    }
    std::set<std::string> column_names;
    for (const auto& column : table.columns) {
      if (column.name.empty()) {
        throw ValidationError("table '" + table.name + "' has a column with an empty name");
      }
      if (!column_names.insert(column.name).second) {
        throw ValidationError("table '" + table.name + "' has duplicate column '" + column.name +
                              "'");
      }
    }
  }
}

std::string render_schema_text(const DatabaseSchema& schema) {
  std::string out;
  for (std::size_t i = 0; i < schema.tables.size(); ++i) {
    const auto& table = schema.tables[i];
    if (i > 0) out += '\n';
    out += "table ";
    out += table.name;
    out += '(';
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j > 0) out += ", ";
      out += table.columns[j].name;
    }
    out += ')';
  }
  return out;
}

}  // namespace k2sql
