#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "k2sql/core/types.hpp"
#include "k2sql/llm/generator.hpp"

namespace k2sql::llm {

// Inputs to the knowledge model: question, schema text and the selected
// sub-table content.
struct GenerationInput {
  std::string question;
  std::string schema_text;
  std::string subtables_text;
  friend bool operator==(const GenerationInput&, const GenerationInput&) = default;
};

using TemplateValues = std::map<std::string, std::string, std::less<>>;

// {{name}} is replaced by the value; {{#name}}...{{/name}} is kept only when the
// value is non-empty. Unknown names and unbalanced sections throw ValidationError.
std::string render_template(std::string_view tmpl, const TemplateValues& values);

struct PromptTemplates {
  std::string knowledge;
  std::string text2sql;

  // Reads knowledge.txt and text2sql.txt from dir.
  static PromptTemplates load(const std::filesystem::path& dir);
};

std::string knowledge_prompt(const GenerationInput& input, const PromptTemplates& templates);
// The knowledge section is rendered only when knowledge is present and non-empty.
std::string text2sql_prompt(const Instance& instance, const DatabaseSchema& schema,
                            const std::optional<Knowledge>& knowledge,
                            const PromptTemplates& templates);

// Trims whitespace and a surrounding ``` fence (with optional language tag).
std::string strip_code_fences(std::string_view completion);

// First SQL statement in a completion: the first fenced block when there is one,
// else the first line that starts with a SQL keyword, continued up to a blank line
// or ';'. A trailing ';' is dropped. nullopt when nothing qualifies.
std::optional<std::string> extract_sql(std::string_view completion);

struct KnowledgeGeneration {
  std::string prompt;
  std::string completion;
  Knowledge knowledge;
};

KnowledgeGeneration generate_knowledge(const GenerationInput& input, Generator& generator,
                                       const GenerationConfig& config,
                                       const PromptTemplates& templates);

struct SqlGeneration {
  std::string prompt;
  std::string completion;
  std::optional<std::string> sql;
  std::string extraction_error;  // set iff sql is empty
};

SqlGeneration generate_sql(const Instance& instance, const DatabaseSchema& schema,
                           const std::optional<Knowledge>& knowledge, Generator& generator,
                           const GenerationConfig& config, const PromptTemplates& templates);

}  // namespace k2sql::llm
