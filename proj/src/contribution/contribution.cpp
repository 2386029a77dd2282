#include "k2sql/contribution/contribution.hpp"

#include <cctype>

#include "k2sql/core/error.hpp"
#include "k2sql/core/text_scan.hpp"

namespace k2sql::contribution {
namespace {

bool is_operator(char c) {
  switch (c) {
    case '=':
    case '<':
    case '>':
    case '+':
    case '-':
    case '*':
    case '/':
    case ',':
    case '(':
    case ')':
      return true;
    default:
      return false;
  }
}

std::string_view strip_trailing_punctuation(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || s.back() == ';' ||
                        std::isspace(static_cast<unsigned char>(s.back())))) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_comparison_char(char c) { return c == '<' || c == '>' || c == '!' || c == '='; }

}  // namespace

std::string normalize(std::string_view text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  bool pending_space = false;
  for (char raw : text) {
    const auto u = static_cast<unsigned char>(raw);
    if (std::isspace(u)) {
      pending_space = true;
      continue;
    }
    char c = u < 0x80 ? static_cast<char>(std::tolower(u)) : raw;
    if (c == '`' || c == '[' || c == ']') c = '"';
    if (pending_space && !collapsed.empty()) collapsed += ' ';
    pending_space = false;
    collapsed += c;
  }
  std::string out;
  out.reserve(collapsed.size());
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    const char c = collapsed[i];
    if (c == ' ') {
      const bool prev_op = !out.empty() && is_operator(out.back());
      const bool next_op = i + 1 < collapsed.size() && is_operator(collapsed[i + 1]);
      if (prev_op || next_op) continue;
    }
    out += c;
  }
  return out;
}

std::string extract_payload(std::string_view fragment, const PayloadMarkers& markers) {
  const auto top = top_level_mask(fragment);
  std::size_t payload_start = std::string_view::npos;
  std::size_t best_pos = 0;
  for (const auto& phrase : markers.phrases) {
    for (std::size_t p = find_word_icase(fragment, phrase); p != std::string_view::npos;
         p = find_word_icase(fragment, phrase, p + 1)) {
      if (!top[p]) continue;
      if (payload_start == std::string_view::npos || p > best_pos ||
          (p == best_pos && p + phrase.size() > payload_start)) {
        best_pos = p;
        payload_start = p + phrase.size();
      }
    }
  }
  if (payload_start == std::string_view::npos && markers.use_equals) {
    for (std::size_t i = 0; i < fragment.size(); ++i) {
      if (fragment[i] != '=' || !top[i]) continue;
      const bool compound = (i > 0 && is_comparison_char(fragment[i - 1])) ||
                            (i + 1 < fragment.size() && fragment[i + 1] == '=');
      if (compound) continue;
      if (fragment.substr(0, i).find('`') == std::string_view::npos) payload_start = i + 1;
      break;
    }
  }
  std::string_view payload =
      payload_start == std::string_view::npos ? fragment : fragment.substr(payload_start);
  payload = strip_trailing_punctuation(payload);
  if (payload.empty()) payload = strip_trailing_punctuation(fragment);
  return std::string(payload);
}

ContributionCheck check_contribution(const Knowledge& knowledge, std::string_view gold_sql,
                                     const PayloadMarkers& markers) {
  if (trim(gold_sql).empty()) throw ValidationError("gold SQL is empty");
  ContributionCheck check;
  const std::string target = normalize(gold_sql);
  for (const auto& fragment : knowledge.sub_knowledge) {
    std::string payload = extract_payload(fragment, markers);
    const bool inside = target.find(normalize(payload)) != std::string::npos;
    check.fragments.push_back(fragment);
    check.payloads.push_back(std::move(payload));
    check.contained.push_back(inside);
    if (!inside) check.indicator = 0;
  }
  return check;
}

int indicator_sql(const Knowledge& knowledge, std::string_view gold_sql,
                  const PayloadMarkers& markers) {
  return check_contribution(knowledge, gold_sql, markers).indicator;
}

OrderedJson contribution_report_record(const std::string& instance_id, const std::string& variant,
                                       const ContributionCheck& check) {
  OrderedJson j;
  j["instance_id"] = instance_id;
  j["variant"] = variant;
  j["fragments"] = check.fragments;
  j["payloads"] = check.payloads;
  j["contained"] = check.contained;
  j["indicator"] = check.indicator;
  return j;
}

}  // namespace k2sql::contribution
