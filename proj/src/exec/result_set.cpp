#include "k2sql/exec/result_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

namespace k2sql::exec {
namespace {

constexpr double kRelTolerance = 1e-6;
constexpr double kTwo63 = 9223372036854775808.0;

int type_rank(const CellValue& v) {
  switch (v.index()) {
    case 0:
      return 0;
    case 1:
    case 2:
      return 1;
    case 3:
      return 2;
    default:
      return 3;
  }
}

int sign(auto x) { return (x > 0) - (x < 0); }

int compare_int_double(std::int64_t i, double d) {
  if (std::isnan(d)) return -1;
  if (d >= kTwo63) return -1;
  if (d < -kTwo63) return 1;
  const double t = std::trunc(d);
  const auto ti = static_cast<std::int64_t>(t);
  if (i != ti) return i < ti ? -1 : 1;
  const double frac = d - t;
  return frac > 0 ? -1 : (frac < 0 ? 1 : 0);
}

int compare_doubles(double a, double b) {
  const bool na = std::isnan(a);
  const bool nb = std::isnan(b);
  if (na || nb) return static_cast<int>(na) - static_cast<int>(nb);
  return a < b ? -1 : (a > b ? 1 : 0);
}

bool int_equals_real(std::int64_t i, double r) { return compare_int_double(i, r) == 0; }

bool reals_equal(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= kRelTolerance * scale;
}

bool rows_equal(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!cells_equal(a[i], b[i])) return false;
  }
  return true;
}

bool has_real(const std::vector<Row>& rows) {
  for (const auto& row : rows) {
    for (const auto& cell : row) {
      if (std::holds_alternative<double>(cell)) return true;
    }
  }
  return false;
}

// Bipartite matching of rows under the tolerant equality (Kuhn's algorithm).
// Only reached when sorted pairwise comparison fails and reals are present.
bool perfect_row_matching(const std::vector<Row>& left, const std::vector<Row>& right) {
  const std::size_t n = left.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rows_equal(left[i], right[j])) adj[i].push_back(j);
    }
    if (adj[i].empty()) return false;
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_right(n, kNone);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t u) -> bool {
    for (std::size_t v : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      if (match_right[v] == kNone || self(self, match_right[v])) {
        match_right[v] = u;
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < n; ++u) {
    seen.assign(n, 0);
    if (!augment(augment, u)) return false;
  }
  return true;
}

}  // namespace

bool cells_equal(const CellValue& a, const CellValue& b) {
  if (const auto* ai = std::get_if<std::int64_t>(&a)) {
    if (const auto* bi = std::get_if<std::int64_t>(&b)) return *ai == *bi;
    if (const auto* br = std::get_if<double>(&b)) return int_equals_real(*ai, *br);
    return false;
  }
  if (const auto* ar = std::get_if<double>(&a)) {
    if (const auto* br = std::get_if<double>(&b)) return reals_equal(*ar, *br);
    if (const auto* bi = std::get_if<std::int64_t>(&b)) return int_equals_real(*bi, *ar);
    return false;
  }
  return a == b;
}

int compare_cells(const CellValue& a, const CellValue& b) {
  const int ra = type_rank(a);
  const int rb = type_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0:
      return 0;
    case 1: {
      const auto* ai = std::get_if<std::int64_t>(&a);
      const auto* bi = std::get_if<std::int64_t>(&b);
      if (ai && bi) return *ai < *bi ? -1 : (*ai > *bi ? 1 : 0);
      if (ai) {
        const int c = compare_int_double(*ai, std::get<double>(b));
        return c != 0 ? c : -1;
      }
      if (bi) {
        const int c = -compare_int_double(*bi, std::get<double>(a));
        return c != 0 ? c : 1;
      }
      return compare_doubles(std::get<double>(a), std::get<double>(b));
    }
    case 2: {
      const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
      return sign(c);
    }
    default: {
      const int c = std::get<Blob>(a).bytes.compare(std::get<Blob>(b).bytes);
      return sign(c);
    }
  }
}

int compare_rows(const Row& a, const Row& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (const int c = compare_cells(a[i], b[i]); c != 0) return c;
  }
  return a.size() == b.size() ? 0 : (a.size() < b.size() ? -1 : 1);
}

bool result_sets_equal(const ResultSet& a, const ResultSet& b) {
  if (a.column_count != b.column_count) return false;
  if (a.rows.size() != b.rows.size()) return false;
  auto left = a.rows;
  auto right = b.rows;
  auto less = [](const Row& x, const Row& y) { return compare_rows(x, y) < 0; };
  std::sort(left.begin(), left.end(), less);
  std::sort(right.begin(), right.end(), less);
  bool pairwise = true;
  for (std::size_t i = 0; i < left.size() && pairwise; ++i) {
    pairwise = rows_equal(left[i], right[i]);
  }
  if (pairwise) return true;
  if (!has_real(left) && !has_real(right)) return false;
  return perfect_row_matching(left, right);
}

std::string render_cell(const CellValue& v) {
  struct Visitor {
    std::string operator()(Null) const { return "NULL"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      if (std::isnan(d)) return "NaN";
      if (std::isinf(d)) return d > 0 ? "Inf" : "-Inf";
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
      std::string s(buf, end);
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      return s;
    }
    std::string operator()(const std::string& s) const {
      std::string out = "'";
      for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
    std::string operator()(const Blob& b) const {
      static constexpr char kHex[] = "0123456789ABCDEF";
      std::string out = "X'";
      for (unsigned char c : b.bytes) {
        out += kHex[c >> 4];
        out += kHex[c & 0xF];
      }
      return out + "'";
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace k2sql::exec
