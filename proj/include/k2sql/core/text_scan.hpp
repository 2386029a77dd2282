#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace k2sql {

// Tracks parenthesis depth and SQL-style quoting while walking a string left to
// right. A position is "top level" when it is outside every quote and at depth 0.
//
// Openers: ` " [ and ' (the latter only when not preceded by an alphanumeric, so
// that apostrophes in prose such as "school's" are ignored). An unterminated quote
// extends to the end of the text.
class QuoteScanner {
 public:
  explicit QuoteScanner(std::string_view text) : text_(text) {}

  // True when text[pos] is outside quotes and parentheses, evaluated before the
  // character at pos is consumed. Must be called with non-decreasing pos.
  bool top_level_at(std::size_t pos);

  // True when text[pos] is outside quotes (parentheses ignored).
  bool unquoted_at(std::size_t pos);

 private:
  void advance_to(std::size_t pos);

  std::string_view text_;
  std::size_t next_ = 0;
  int depth_ = 0;
  char closer_ = 0;
};

// Per-position top-level flags for the whole text.
std::vector<bool> top_level_mask(std::string_view text);

bool is_word_char(char c);
std::string_view trim(std::string_view s);

// Case-insensitive ASCII search starting at from; npos when absent.
std::size_t find_icase(std::string_view haystack, std::string_view needle, std::size_t from = 0);

// Case-insensitive whole-word search: the match must not be flanked by word characters.
std::size_t find_word_icase(std::string_view haystack, std::string_view needle,
                            std::size_t from = 0);

}  // namespace k2sql
