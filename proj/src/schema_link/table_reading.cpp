#include "k2sql/schema_link/table_reading.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "k2sql/core/error.hpp"

namespace k2sql::schema_link {
namespace {

struct ColumnRef {
  const Table* table;
  const Column* column;
};

std::vector<ColumnRef> flatten(const DatabaseSchema& schema) {
  std::vector<ColumnRef> out;
  out.reserve(schema.column_count());
  for (const auto& t : schema.tables) {
    for (const auto& c : t.columns) out.push_back({&t, &c});
  }
  return out;
}

void check_config(const DatabaseSchema& schema, const SimilarityConfig& config) {
  if (config.embedder == nullptr) throw ValidationError("similarity config has no embedder");
  if (!std::isfinite(config.alpha)) throw ValidationError("alpha must be finite");
  if (schema.tables.empty()) throw ValidationError("schema '" + schema.db_id + "' is empty");
}

bool match_order(const ColumnMatch& a, const ColumnMatch& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.table != b.table) return a.table < b.table;
  return a.column < b.column;
}

ColumnMatchSet collect(const std::vector<ColumnRef>& refs, const std::vector<double>& scores,
                       double alpha) {
  ColumnMatchSet out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (scores[i] > alpha) {
      out.entries.push_back({refs[i].table->name, refs[i].column->name, scores[i]});
    }
  }
  std::sort(out.entries.begin(), out.entries.end(), match_order);
  return out;
}

using ColumnKeySet = std::set<std::pair<std::string, std::string>>;

RelevantSubTables group_in_schema_order(const ColumnKeySet& chosen, const DatabaseSchema& schema) {
  RelevantSubTables out;
  for (const auto& t : schema.tables) {
    SubTable sub{t.name, {}};
    for (const auto& c : t.columns) {
      if (chosen.contains({t.name, c.name})) sub.columns.push_back(c.name);
    }
    if (!sub.columns.empty()) out.tables.push_back(std::move(sub));
  }
  return out;
}

}  // namespace

std::size_t RelevantSubTables::column_count() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.columns.size();
  return n;
}

const SubTable* RelevantSubTables::find(std::string_view table) const {
  for (const auto& t : tables) {
    if (t.table == table) return &t;
  }
  return nullptr;
}

std::string column_descriptor(const Table& table, const Column& column) {
  std::string d = table.name + " " + column.name;
  if (column.description && !column.description->empty()) d += " " + *column.description;
  return d;
}

double similarity(std::string_view question, const Table& table, const Column& column,
                  const Embedder& embedder) {
  return cosine(embedder.embed(question), embedder.embed(column_descriptor(table, column)));
}

ColumnMatchSet match_columns(std::string_view question, const DatabaseSchema& schema,
                             const SimilarityConfig& config) {
  check_config(schema, config);
  const auto refs = flatten(schema);
  const Embedder& embedder = *config.embedder;
  const Embedding q = embedder.embed(question);
  std::vector<double> scores(refs.size());
  const auto n = static_cast<std::ptrdiff_t>(refs.size());
  if (embedder.concurrent_safe()) {
#pragma omp parallel for schedule(static) num_threads(std::max(1, config.workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& r = refs[static_cast<std::size_t>(i)];
      scores[static_cast<std::size_t>(i)] =
          cosine(q, embedder.embed(column_descriptor(*r.table, *r.column)));
    }
  } else {
    std::vector<Embedding> embedded;
    embedded.reserve(refs.size());
    for (const auto& r : refs) {
      embedded.push_back(embedder.embed(column_descriptor(*r.table, *r.column)));
    }
#pragma omp parallel for schedule(static) num_threads(std::max(1, config.workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = cosine(q, embedded[static_cast<std::size_t>(i)]);
    }
  }
  return collect(refs, scores, config.alpha);
}

ColumnMatchSet match_columns_serial(std::string_view question, const DatabaseSchema& schema,
                                    const SimilarityConfig& config) {
  check_config(schema, config);
  const auto refs = flatten(schema);
  std::vector<double> scores;
  scores.reserve(refs.size());
  for (const auto& r : refs) {
    scores.push_back(similarity(question, *r.table, *r.column, *config.embedder));
  }
  return collect(refs, scores, config.alpha);
}

RelevantSubTables select_subtables(const ColumnMatchSet& matches, const DatabaseSchema& schema,
                                   std::optional<std::size_t> max_columns) {
  if (max_columns && *max_columns == 0) throw ValidationError("max_columns must be positive");
  std::size_t keep = matches.entries.size();
  if (max_columns) keep = std::min(keep, *max_columns);
  ColumnKeySet chosen;
  for (std::size_t i = 0; i < keep; ++i) {
    const auto& m = matches.entries[i];
    const Table* t = schema.find_table(m.table);
    if (t == nullptr || t->find_column(m.column) == nullptr) {
      throw ValidationError("match " + m.table + "." + m.column + " is not in schema '" +
                            schema.db_id + "'");
    }
    chosen.emplace(m.table, m.column);
  }
  return group_in_schema_order(chosen, schema);
}

OrderedJson subtables_to_json(const RelevantSubTables& subtables) {
  OrderedJson j = OrderedJson::object();
  for (const auto& t : subtables.tables) j[t.table] = t.columns;
  return j;
}

RelevantSubTables subtables_from_json(const Json& j, const DatabaseSchema& schema) {
  if (!j.is_object()) throw ValidationError("subtables must be a JSON object");
  ColumnKeySet chosen;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Table* t = schema.find_table(it.key());
    if (t == nullptr) {
      throw ValidationError("subtable '" + it.key() + "' is not in schema '" + schema.db_id + "'");
    }
    for (const auto& col : it.value().get<std::vector<std::string>>()) {
      if (t->find_column(col) == nullptr) {
        throw ValidationError("subtable column " + it.key() + "." + col + " is not in schema");
      }
      chosen.emplace(it.key(), col);
    }
  }
  return group_in_schema_order(chosen, schema);
}

OrderedJson table_reading_record(const std::string& instance_id, double alpha,
                                 const std::string& embedder_name, const ColumnMatchSet& matches,
                                 const RelevantSubTables& subtables) {
  OrderedJson j;
  j["instance_id"] = instance_id;
  j["alpha"] = alpha;
  j["embedder_name"] = embedder_name;
  OrderedJson list = OrderedJson::array();
  for (const auto& m : matches.entries) {
    OrderedJson e;
    e["table"] = m.table;
    e["column"] = m.column;
    e["score"] = m.score;
    list.push_back(std::move(e));
  }
  j["matches"] = std::move(list);
  j["subtables"] = subtables_to_json(subtables);
  return j;
}

}  // namespace k2sql::schema_link
