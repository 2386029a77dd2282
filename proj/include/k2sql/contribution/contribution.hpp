#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "k2sql/core/io.hpp"
#include "k2sql/core/types.hpp"

namespace k2sql::contribution {

// Canonical form for containment tests: ASCII-lowercased, identifier quotes
// (` " [ ]) unified to ", whitespace runs collapsed to one space, and spaces next
// to = < > + - * / , ( ) removed. Idempotent.
std::string normalize(std::string_view text);

struct PayloadMarkers {
  // Phrase markers; the payload starts after the last top-level occurrence.
  std::vector<std::string> phrases{"refers to", "refer to", "means"};
  // Fall back to the first top-level '=' whose left side has no backtick identifier.
  bool use_equals = true;
};

// The SQL-side expression of a sub-knowledge fragment. Fragments without a marker
// are returned whole. Trailing sentence punctuation is stripped.
std::string extract_payload(std::string_view fragment, const PayloadMarkers& markers = {});

struct ContributionCheck {
  std::vector<std::string> fragments;
  std::vector<std::string> payloads;
  std::vector<bool> contained;
  int indicator = 1;
};

// Per-fragment detail behind indicator_sql.
ContributionCheck check_contribution(const Knowledge& knowledge, std::string_view gold_sql,
                                     const PayloadMarkers& markers = {});

// 1 iff every fragment's normalized payload is a substring of the normalized gold
// SQL. An empty fragment list yields 1.
int indicator_sql(const Knowledge& knowledge, std::string_view gold_sql,
                  const PayloadMarkers& markers = {});

// {instance_id, variant, fragments, payloads, contained, indicator}
OrderedJson contribution_report_record(const std::string& instance_id, const std::string& variant,
                                       const ContributionCheck& check);

}  // namespace k2sql::contribution
