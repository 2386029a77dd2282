#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "k2sql/core/io.hpp"
#include "k2sql/core/types.hpp"
#include "k2sql/exec/executor.hpp"
#include "k2sql/llm/generator.hpp"
#include "k2sql/llm/prompt.hpp"
#include "k2sql/schema_link/table_reading.hpp"

namespace k2sql::preference {

using llm::GenerationInput;

inline constexpr std::size_t kExampleValues = 3;
inline constexpr std::size_t kMaxExampleChars = 100;

// Up to `limit` distinct non-null values of one column in ascending order, read
// through the read-only executor. Throws Error when the query fails.
std::vector<exec::CellValue> example_values(const DatabaseSchema& schema, const std::string& table,
                                            const std::string& column,
                                            std::size_t limit = kExampleValues);

// Per selected table:
//   table <name>:
//     <column>: <v1>, <v2>, <v3>
// Columns whose values cannot be read are listed without values and a warning is
// appended. Empty subtables render as "".
std::string render_subtables_text(const schema_link::RelevantSubTables& subtables,
                                  const DatabaseSchema& schema,
                                  std::vector<std::string>* warnings = nullptr);

GenerationInput render_input(const Instance& instance,
                             const schema_link::RelevantSubTables& subtables,
                             const DatabaseSchema& schema,
                             std::vector<std::string>* warnings = nullptr);

enum class Source { db, sql };
std::string_view to_string(Source s);

// chosen is always the gold knowledge and rejected the generated one.
struct PreferencePair {
  std::string instance_id;
  Source source = Source::db;
  GenerationInput input;
  Knowledge chosen;
  Knowledge rejected;
};

OrderedJson pair_to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const Json& j);

// Everything one feedback pass needs about an instance.
struct FeedbackItem {
  const Instance* instance = nullptr;
  const DatabaseSchema* schema = nullptr;
  GenerationInput input;
  Knowledge gen_knowledge;
  Knowledge gold_knowledge;
};

// Predictions and executions behind one database-feedback decision.
struct DbEntry {
  std::string instance_id;
  llm::SqlGeneration with_gold;
  llm::SqlGeneration with_gen;
  exec::ExecutionOutcome gold_outcome;
  exec::ExecutionOutcome gen_outcome;
  int indicator = 1;
};

struct Exclusion {
  std::string instance_id;
  std::string reason;
};

struct DbFeedback {
  std::vector<PreferencePair> pairs;
  std::map<std::string, DbEntry> entries;  // by instance id; provider failures have none
  // The gold-knowledge prediction could not be executed, so the instance has no
  // valid reference for the execution comparison.
  std::vector<Exclusion> quarantined;
  // Provider failures.
  std::vector<Exclusion> skipped;
};

struct DbFeedbackOptions {
  llm::GenerationConfig generation;
  exec::ExecOptions exec;
  int workers = 1;
};

// Predicts SQL with gold and with generated knowledge, executes both and emits a
// db pair exactly when the two executions disagree. A prediction that cannot be
// extracted or executed counts as a mismatch.
DbFeedback collect_db_pairs(std::span<const FeedbackItem> items, llm::Generator& text_to_sql,
                            const llm::PromptTemplates& templates,
                            const DbFeedbackOptions& options);

// Emits an sql pair exactly when the gold knowledge is contained in the gold SQL
// and the generated knowledge is not.
std::vector<PreferencePair> collect_sql_pairs(std::span<const FeedbackItem> items);

// Union with duplicates on (instance_id, chosen.text, rejected.text) removed,
// keeping the db pair. Ordered by instance_id, then source (db first), then texts.
std::vector<PreferencePair> assemble_dataset(std::span<const PreferencePair> db_pairs,
                                             std::span<const PreferencePair> sql_pairs);

// Re-checks a pair's defining condition. db pairs need the entry recorded for the
// instance; sql pairs need the gold SQL.
bool verify_pair(const PreferencePair& pair, const std::map<std::string, DbEntry>& entries,
                 const std::string& gold_sql);

}  // namespace k2sql::preference
