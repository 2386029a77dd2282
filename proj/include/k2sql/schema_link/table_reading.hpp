#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "k2sql/core/io.hpp"
#include "k2sql/core/types.hpp"
#include "k2sql/schema_link/embedder.hpp"

namespace k2sql::schema_link {

inline constexpr double kDefaultAlpha = 0.6;

struct SimilarityConfig {
  double alpha = kDefaultAlpha;
  const Embedder* embedder = nullptr;
  int workers = 1;
};

struct ColumnMatch {
  std::string table;
  std::string column;
  double score = 0.0;
  friend bool operator==(const ColumnMatch&, const ColumnMatch&) = default;
};

// Sorted by score descending, then (table, column) ascending.
struct ColumnMatchSet {
  std::vector<ColumnMatch> entries;
};

struct SubTable {
  std::string table;
  std::vector<std::string> columns;  // schema order
  friend bool operator==(const SubTable&, const SubTable&) = default;
};

// Selected columns grouped by table, tables in schema order. A table appears iff
// at least one of its columns was selected.
struct RelevantSubTables {
  std::vector<SubTable> tables;

  bool empty() const { return tables.empty(); }
  std::size_t column_count() const;
  const SubTable* find(std::string_view table) const;
};

// "<table> <column>" followed by " <description>" when one is present.
std::string column_descriptor(const Table& table, const Column& column);

// Cosine similarity between the question and the column descriptor.
double similarity(std::string_view question, const Table& table, const Column& column,
                  const Embedder& embedder);

// Columns whose similarity is strictly greater than alpha. Scores are computed
// in parallel when the embedder allows concurrent calls.
ColumnMatchSet match_columns(std::string_view question, const DatabaseSchema& schema,
                             const SimilarityConfig& config);
// Serial reference for match_columns.
ColumnMatchSet match_columns_serial(std::string_view question, const DatabaseSchema& schema,
                                    const SimilarityConfig& config);

// Keeps the top max_columns matches (when set) and groups them by table.
RelevantSubTables select_subtables(const ColumnMatchSet& matches, const DatabaseSchema& schema,
                                   std::optional<std::size_t> max_columns = std::nullopt);

OrderedJson subtables_to_json(const RelevantSubTables& subtables);
// Restores schema order; throws ValidationError for tables or columns not in the schema.
RelevantSubTables subtables_from_json(const Json& j, const DatabaseSchema& schema);

// {instance_id, alpha, embedder_name, matches: [...], subtables: {...}}
OrderedJson table_reading_record(const std::string& instance_id, double alpha,
                                 const std::string& embedder_name, const ColumnMatchSet& matches,
                                 const RelevantSubTables& subtables);

}  // namespace k2sql::schema_link
