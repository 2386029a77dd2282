#include "k2sql/preference/preference.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "k2sql/contribution/contribution.hpp"
#include "k2sql/core/error.hpp"
#include "k2sql/core/knowledge.hpp"
#include "k2sql/core/sqlite.hpp"

namespace k2sql::preference {
namespace {

// Keeps at most max_bytes of the text without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return s;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  s.resize(cut);
  return s + "...";
}

std::string render_example(const exec::CellValue& v) {
  if (const auto* text = std::get_if<std::string>(&v)) {
    return exec::render_cell(exec::CellValue(truncate_utf8(*text, kMaxExampleChars)));
  }
  return exec::render_cell(v);
}

exec::ExecutionOutcome unexecutable(const std::string& why) {
  exec::ExecutionOutcome o;
  o.status = exec::Status::sql_error;
  o.error_message = why;
  return o;
}

auto pair_key(const PreferencePair& p) {
  return std::tie(p.instance_id, p.chosen.text, p.rejected.text);
}

}  // namespace

std::string_view to_string(Source s) { return s == Source::db ? "db" : "sql"; }

std::vector<exec::CellValue> example_values(const DatabaseSchema& schema, const std::string& table,
                                            const std::string& column, std::size_t limit) {
  const std::string col = quote_identifier(column);
  const std::string sql = "SELECT DISTINCT " + col + " FROM " + quote_identifier(table) +
                          " WHERE " + col + " IS NOT NULL ORDER BY 1 LIMIT " +
                          std::to_string(limit);
  auto outcome = exec::execute(sql, schema);
  if (!outcome.ok()) {
    throw Error("cannot read values of " + table + "." + column + ": " + outcome.error_message);
  }
  std::vector<exec::CellValue> values;
  for (auto& row : outcome.result->rows) values.push_back(std::move(row.at(0)));
  return values;
}

std::string render_subtables_text(const schema_link::RelevantSubTables& subtables,
                                  const DatabaseSchema& schema,
                                  std::vector<std::string>* warnings) {
  std::string out;
  for (const auto& sub : subtables.tables) {
    if (!out.empty()) out += '\n';
    out += "table " + sub.table + ":";
    for (const auto& column : sub.columns) {
      out += "\n  " + column + ":";
      try {
        const auto values = example_values(schema, sub.table, column);
        for (std::size_t i = 0; i < values.size(); ++i) {
          out += i == 0 ? " " : ", ";
          out += render_example(values[i]);
        }
      } catch (const Error& e) {
        if (warnings != nullptr) warnings->push_back(e.what());
      }
    }
  }
  return out;
}

GenerationInput render_input(const Instance& instance,
                             const schema_link::RelevantSubTables& subtables,
                             const DatabaseSchema& schema, std::vector<std::string>* warnings) {
  return {instance.question, render_schema_text(schema),
          render_subtables_text(subtables, schema, warnings)};
}

OrderedJson pair_to_json(const PreferencePair& pair) {
  OrderedJson j;
  j["instance_id"] = pair.instance_id;
  j["source"] = to_string(pair.source);
  OrderedJson input;
  input["question"] = pair.input.question;
  input["schema_text"] = pair.input.schema_text;
  input["subtables_text"] = pair.input.subtables_text;
  j["input"] = std::move(input);
  j["chosen"] = pair.chosen.text;
  j["rejected"] = pair.rejected.text;
  return j;
}

PreferencePair pair_from_json(const Json& j) {
  try {
    PreferencePair p;
    p.instance_id = j.at("instance_id").get<std::string>();
    const auto source = j.at("source").get<std::string>();
    if (source != "db" && source != "sql") throw ValidationError("unknown source '" + source + "'");
    p.source = source == "db" ? Source::db : Source::sql;
    const Json& input = j.at("input");
    p.input = {input.at("question").get<std::string>(), input.at("schema_text").get<std::string>(),
               input.at("subtables_text").get<std::string>()};
    p.chosen = decompose_knowledge(j.at("chosen").get<std::string>());
    p.rejected = decompose_knowledge(j.at("rejected").get<std::string>());
    return p;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed preference pair: ") + e.what());
  }
}

DbFeedback collect_db_pairs(std::span<const FeedbackItem> items, llm::Generator& text_to_sql,
                            const llm::PromptTemplates& templates,
                            const DbFeedbackOptions& options) {
  const std::size_t n = items.size();
  std::vector<DbEntry> entries(n);
  std::vector<std::string> failures(n);

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.workers))
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto& item = items[static_cast<std::size_t>(i)];
    auto& entry = entries[static_cast<std::size_t>(i)];
    entry.instance_id = item.instance->id;
    try {
      entry.with_gold = llm::generate_sql(*item.instance, *item.schema, item.gold_knowledge,
                                          text_to_sql, options.generation, templates);
      if (item.gen_knowledge.text == item.gold_knowledge.text) {
        entry.with_gen = entry.with_gold;
      } else {
        entry.with_gen = llm::generate_sql(*item.instance, *item.schema, item.gen_knowledge,
                                           text_to_sql, options.generation, templates);
      }
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }

  std::vector<exec::QueryJob> jobs;
  std::vector<std::pair<std::size_t, bool>> job_owner;  // (item index, is gold side)
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) continue;
    if (entries[i].with_gold.sql) {
      jobs.push_back({*entries[i].with_gold.sql, items[i].schema});
      job_owner.emplace_back(i, true);
    } else {
      entries[i].gold_outcome = unexecutable(entries[i].with_gold.extraction_error);
    }
    if (entries[i].with_gen.sql) {
      jobs.push_back({*entries[i].with_gen.sql, items[i].schema});
      job_owner.emplace_back(i, false);
    } else {
      entries[i].gen_outcome = unexecutable(entries[i].with_gen.extraction_error);
    }
  }
  auto outcomes = exec::execute_batch(jobs, options.exec, options.workers);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& entry = entries[job_owner[k].first];
    (job_owner[k].second ? entry.gold_outcome : entry.gen_outcome) = std::move(outcomes[k]);
  }

  DbFeedback out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& item = items[i];
    if (!failures[i].empty()) {
      out.skipped.push_back({item.instance->id, failures[i]});
      continue;
    }
    auto& entry = entries[i];
    if (!entry.gold_outcome.ok()) {
      out.quarantined.push_back({item.instance->id, "gold-knowledge prediction failed: " +
                                                        entry.gold_outcome.error_message});
      out.entries.emplace(entry.instance_id, std::move(entry));
      continue;
    }
    entry.indicator = exec::indicator_db(entry.gold_outcome, entry.gen_outcome);
    if (entry.indicator == 0 && item.gold_knowledge.text != item.gen_knowledge.text) {
      out.pairs.push_back(
          {item.instance->id, Source::db, item.input, item.gold_knowledge, item.gen_knowledge});
    }
    out.entries.emplace(entry.instance_id, std::move(entry));
  }
  return out;
}

std::vector<PreferencePair> collect_sql_pairs(std::span<const FeedbackItem> items) {
  std::vector<PreferencePair> pairs;
  for (const auto& item : items) {
    const auto& gold_sql = item.instance->gold_sql;
    if (contribution::indicator_sql(item.gold_knowledge, gold_sql) == 1 &&
        contribution::indicator_sql(item.gen_knowledge, gold_sql) == 0) {
      pairs.push_back(
          {item.instance->id, Source::sql, item.input, item.gold_knowledge, item.gen_knowledge});
    }
  }
  return pairs;
}

std::vector<PreferencePair> assemble_dataset(std::span<const PreferencePair> db_pairs,
                                             std::span<const PreferencePair> sql_pairs) {
  std::vector<PreferencePair> all(db_pairs.begin(), db_pairs.end());
  all.insert(all.end(), sql_pairs.begin(), sql_pairs.end());
  std::sort(all.begin(), all.end(), [](const PreferencePair& a, const PreferencePair& b) {
    if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
    if (a.source != b.source) return a.source == Source::db;
    return std::tie(a.chosen.text, a.rejected.text) < std::tie(b.chosen.text, b.rejected.text);
  });
  std::vector<PreferencePair> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (auto& p : all) {
    if (seen.emplace(pair_key(p)).second) out.push_back(std::move(p));
  }
  return out;
}

bool verify_pair(const PreferencePair& pair, const std::map<std::string, DbEntry>& entries,
                 const std::string& gold_sql) {
  if (pair.chosen.text == pair.rejected.text) return false;
  if (pair.source == Source::db) {
    auto it = entries.find(pair.instance_id);
    if (it == entries.end() || !it->second.gold_outcome.ok()) return false;
    return exec::indicator_db(it->second.gold_outcome, it->second.gen_outcome) == 0;
  }
  return contribution::indicator_sql(pair.chosen, gold_sql) == 1 &&
         contribution::indicator_sql(pair.rejected, gold_sql) == 0;
}

}  // namespace k2sql::preference
