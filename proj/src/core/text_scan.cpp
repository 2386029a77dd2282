#include "k2sql/core/text_scan.hpp"

#include <cctype>

namespace k2sql {

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || u >= 0x80;
}

void QuoteScanner::advance_to(std::size_t pos) {
  while (next_ < pos && next_ < text_.size()) {
    const char c = text_[next_];
    if (closer_ != 0) {
      if (c == closer_) closer_ = 0;
    } else if (c == '`' || c == '"') {
      closer_ = c;
    } else if (c == '[') {
      closer_ = ']';
    } else if (c == '\'') {
      if (next_ == 0 || !is_word_char(text_[next_ - 1])) closer_ = '\'';
    } else if (c == '(') {
      ++depth_;
    } else if (c == ')') {
      if (depth_ > 0) --depth_;
    }
    ++next_;
  }
}

bool QuoteScanner::top_level_at(std::size_t pos) {
  advance_to(pos);
  return closer_ == 0 && depth_ == 0;
}

bool QuoteScanner::unquoted_at(std::size_t pos) {
  advance_to(pos);
  return closer_ == 0;
}

std::vector<bool> top_level_mask(std::string_view text) {
  std::vector<bool> mask(text.size());
  QuoteScanner scanner(text);
  for (std::size_t i = 0; i < text.size(); ++i) mask[i] = scanner.top_level_at(i);
  return mask;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::size_t find_icase(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(haystack[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        ok = false;
        break;
      }
    }
    if (ok) return i;
  }
  return std::string_view::npos;
}

std::size_t find_word_icase(std::string_view haystack, std::string_view needle, std::size_t from) {
  for (std::size_t i = find_icase(haystack, needle, from); i != std::string_view::npos;
       i = find_icase(haystack, needle, i + 1)) {
    const bool left_ok = i == 0 || !is_word_char(haystack[i - 1]) || !is_word_char(needle.front());
    const std::size_t end = i + needle.size();
    const bool right_ok =
        end == haystack.size() || !is_word_char(haystack[end]) || !is_word_char(needle.back());
    if (left_ok && right_ok) return i;
  }
  return std::string_view::npos;
}

}  // namespace k2sql
