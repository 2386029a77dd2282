#include "k2sql/core/knowledge.hpp"

#include <array>
#include <cctype>
#include <string>
#include <vector>

#include "k2sql/core/text_scan.hpp"

namespace k2sql {
namespace {

constexpr std::array<std::string_view, 3> kPhraseMarkers = {"refers to", "refer to", "means"};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

std::string_view clean_fragment(std::string_view s) {
  s = trim(s);
  while (!s.empty() &&
         (is_terminator(s.back()) || std::isspace(static_cast<unsigned char>(s.back())))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string_view strip_leading_and(std::string_view s) {
  s = trim(s);
  if (s.size() > 4 && find_icase(s.substr(0, 4), "and ") == 0) s = trim(s.substr(4));
  return s;
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

// Step 1: sentence and semicolon cuts.
std::vector<Span> sentence_spans(std::string_view text, const std::vector<bool>& top) {
  std::vector<Span> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!top[i]) continue;
    const char c = text[i];
    const bool cut =
        c == ';' || (is_terminator(c) && (i + 1 == text.size() ||
                                          std::isspace(static_cast<unsigned char>(text[i + 1]))));
    if (cut) {
      spans.push_back({start, i});
      start = i + 1;
    }
  }
  spans.push_back({start, text.size()});
  return spans;
}

}  // namespace

bool has_definition_marker(std::string_view text) {
  if (text.find('=') != std::string_view::npos) return true;
  for (auto marker : kPhraseMarkers) {
    if (find_word_icase(text, marker) != std::string_view::npos) return true;
  }
  return false;
}

Knowledge decompose_knowledge(std::string_view text) {
  Knowledge out;
  out.text = std::string(text);
  const auto top = top_level_mask(text);

  for (const Span sentence : sentence_spans(text, top)) {
    // Step 2: candidate comma cuts (", " at top level).
    std::vector<Span> parts;
    std::size_t start = sentence.begin;
    for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
      if (top[i] && text[i] == ',' && i + 1 < sentence.end &&
          std::isspace(static_cast<unsigned char>(text[i + 1]))) {
        parts.push_back({start, i});
        start = i + 1;
      }
    }
    parts.push_back({start, sentence.end});

    std::vector<Span> groups;
    bool group_has_marker = false;
    for (const Span part : parts) {
      const bool marked = has_definition_marker(text.substr(part.begin, part.end - part.begin));
      if (groups.empty() || (marked && group_has_marker)) {
        groups.push_back(part);
        group_has_marker = marked;
      } else {
        groups.back().end = part.end;
        group_has_marker = group_has_marker || marked;
      }
    }

    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::string_view fragment = text.substr(groups[g].begin, groups[g].end - groups[g].begin);
      if (g > 0) fragment = strip_leading_and(fragment);
      fragment = clean_fragment(fragment);
      if (!fragment.empty()) out.sub_knowledge.emplace_back(fragment);
    }
  }
  return out;
}

}  // namespace k2sql
