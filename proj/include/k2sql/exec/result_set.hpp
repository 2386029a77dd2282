#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace k2sql::exec {

struct Null {
  friend bool operator==(Null, Null) = default;
};

struct Blob {
  std::string bytes;
  friend bool operator==(const Blob&, const Blob&) = default;
};

// Tags are significant: Integer 1 and Text "1" are different values.
using CellValue = std::variant<Null, std::int64_t, double, std::string, Blob>;
using Row = std::vector<CellValue>;

struct ResultSet {
  std::size_t column_count = 0;
  std::vector<Row> rows;
};

// Value equality used for result comparison:
//  - Null = Null
//  - Integer i = Real r iff r is integral, within int64 range and equal to i
//  - Real a = Real b iff |a - b| <= 1e-6 * max(1, |a|, |b|); NaN equals NaN
//  - Text and Blob compare bytewise
bool cells_equal(const CellValue& a, const CellValue& b);

// Total order consistent with SQLite's ORDER BY: Null < numbers < Text < Blob.
// Numbers compare by value across Integer/Real (NaN last), ties broken Integer first.
int compare_cells(const CellValue& a, const CellValue& b);
int compare_rows(const Row& a, const Row& b);

// True iff column counts match and the multisets of rows are equal under
// cells_equal. Row order is ignored; column order and duplicates are significant.
bool result_sets_equal(const ResultSet& a, const ResultSet& b);

// SQL-literal style rendering: NULL, 42, 1.5, 'text', X'0A'.
std::string render_cell(const CellValue& v);

}  // namespace k2sql::exec
