#include "k2sql/schema_link/embedder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace k2sql::schema_link {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool is_token_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [_, v] : a.entries) na += v * v;
  for (const auto& [_, v] : b.entries) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  // One square root of the product keeps exact cases exact (e.g. identical vectors).
  const double c = dot / std::sqrt(na * nb);
  return std::clamp(c, -1.0, 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (is_token_char(c)) {
      current += c < 0x80 ? static_cast<char>(std::tolower(c)) : raw;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Embedding TokenOverlapEmbedder::embed(std::string_view text) const {
  std::map<std::uint64_t, double> counts;
  for (const auto& token : tokenize(text)) counts[fnv1a(token)] += 1.0;
  Embedding e;
  e.entries.assign(counts.begin(), counts.end());
  return e;
}

}  // namespace k2sql::schema_link
