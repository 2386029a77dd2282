#include "k2sql/llm/prompt.hpp"

#include <cctype>
#include <regex>
#include <vector>

#include "k2sql/core/knowledge.hpp"
#include "k2sql/core/text_scan.hpp"

namespace k2sql::llm {
namespace {

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

bool keyword_at_start(std::string_view line) {
  static constexpr std::string_view kKeywords[] = {"SELECT", "VALUES",  "INSERT", "UPDATE",
                                                   "DELETE", "REPLACE", "CREATE", "DROP",
                                                   "ALTER",  "PRAGMA"};
  for (auto kw : kKeywords) {
    if (starts_with_icase(line, kw) &&
        (line.size() == kw.size() || !is_word_char(line[kw.size()]))) {
      return true;
    }
  }
  static const std::regex with_clause(R"(^WITH\s+(RECURSIVE\s+)?\w+.*\bAS\b)", std::regex::icase);
  return std::regex_search(std::string(line), with_clause);
}

// Cuts at the first ';' outside quotes, trims, and returns nullopt when empty.
std::optional<std::string> first_statement(std::string_view text) {
  QuoteScanner scan(text);
  std::size_t end = text.size();
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ';' && scan.unquoted_at(i)) {
      end = i;
      break;
    }
  }
  const auto stmt = trim(text.substr(0, end));
  if (stmt.empty()) return std::nullopt;
  return std::string(stmt);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace

std::string render_template(std::string_view tmpl, const TemplateValues& values) {
  std::string out;
  std::vector<std::pair<std::string, bool>> sections;
  auto active = [&] {
    for (const auto& s : sections) {
      if (!s.second) return false;
    }
    return true;
  };
  auto lookup = [&](std::string_view name) -> const std::string& {
    auto it = values.find(name);
    if (it == values.end()) {
      throw ValidationError("template placeholder '" + std::string(name) + "' has no value");
    }
    return it->second;
  };
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      if (active()) out.append(tmpl.substr(pos));
      break;
    }
    if (active()) out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw ValidationError("unterminated {{ in template");
    const auto tag = trim(tmpl.substr(open + 2, close - open - 2));
    if (tag.empty()) throw ValidationError("empty {{}} in template");
    if (tag.front() == '#') {
      const auto name = trim(tag.substr(1));
      sections.emplace_back(std::string(name), !lookup(name).empty());
    } else if (tag.front() == '/') {
      const auto name = trim(tag.substr(1));
      if (sections.empty() || sections.back().first != name) {
        throw ValidationError("unbalanced section {{/" + std::string(name) + "}}");
      }
      sections.pop_back();
    } else if (active()) {
      out += lookup(tag);
    } else {
      lookup(tag);
    }
    pos = close + 2;
  }
  if (!sections.empty()) {
    throw ValidationError("section {{#" + sections.back().first + "}} is never closed");
  }
  return out;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {read_file(dir / "knowledge.txt"), read_file(dir / "text2sql.txt")};
}

std::string knowledge_prompt(const GenerationInput& input, const PromptTemplates& templates) {
  return render_template(templates.knowledge, {{"question", input.question},
                                               {"schema", input.schema_text},
                                               {"subtables", input.subtables_text}});
}

std::string text2sql_prompt(const Instance& instance, const DatabaseSchema& schema,
                            const std::optional<Knowledge>& knowledge,
                            const PromptTemplates& templates) {
  return render_template(templates.text2sql,
                         {{"question", instance.question},
                          {"schema", render_schema_text(schema)},
                          {"knowledge", knowledge ? knowledge->text : std::string()}});
}

std::string strip_code_fences(std::string_view completion) {
  auto s = trim(completion);
  if (s.size() >= 6 && s.starts_with("```") && s.ends_with("```")) {
    s.remove_suffix(3);
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view() : s.substr(nl + 1);
    s = trim(s);
  }
  return std::string(s);
}

std::optional<std::string> extract_sql(std::string_view completion) {
  if (const auto open = completion.find("```"); open != std::string_view::npos) {
    const auto nl = completion.find('\n', open);
    const auto close = nl == std::string_view::npos ? nl : completion.find("```", nl);
    if (close != std::string_view::npos) {
      if (auto stmt = first_statement(completion.substr(nl + 1, close - nl - 1))) return stmt;
    }
  }
  const auto lines = split_lines(completion);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto first = trim(lines[i]);
    if (!keyword_at_start(first)) continue;
    std::string block(first);
    for (std::size_t j = i + 1; j < lines.size() && !trim(lines[j]).empty(); ++j) {
      block += '\n';
      block += lines[j];
    }
    return first_statement(block);
  }
  return std::nullopt;
}

KnowledgeGeneration generate_knowledge(const GenerationInput& input, Generator& generator,
                                       const GenerationConfig& config,
                                       const PromptTemplates& templates) {
  KnowledgeGeneration g;
  g.prompt = knowledge_prompt(input, templates);
  g.completion = generator.complete(g.prompt, config);
  const std::string text = strip_code_fences(g.completion);
  g.knowledge = decompose_knowledge(text);
  g.knowledge.text = text;
  return g;
}

SqlGeneration generate_sql(const Instance& instance, const DatabaseSchema& schema,
                           const std::optional<Knowledge>& knowledge, Generator& generator,
                           const GenerationConfig& config, const PromptTemplates& templates) {
  SqlGeneration g;
  g.prompt = text2sql_prompt(instance, schema, knowledge, templates);
  g.completion = generator.complete(g.prompt, config);
  g.sql = extract_sql(g.completion);
  if (!g.sql) g.extraction_error = "no SQL statement found in completion";
  return g;
}

}  // namespace k2sql::llm
