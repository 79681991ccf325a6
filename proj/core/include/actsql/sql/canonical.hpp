#pragma once

#include <string>

#include "actsql/schema.hpp"
#include "actsql/sql/ast.hpp"

namespace actsql::sql {

// Order-insensitive clause-component form used for exact-match scoring.
// Select items, FROM tables, join conditions, WHERE/HAVING predicates and
// GROUP BY columns become sorted multisets; ORDER BY stays an ordered list
// with direction; LIMIT collapses to a presence flag; set-operation chains
// compare positionally. String and number literals are masked, so two
// queries differing only in literal values compare equal.
struct CanonicalSql {
  std::string repr;
  friend bool operator==(const CanonicalSql&, const CanonicalSql&) = default;
};

CanonicalSql normalize_for_em(const SqlAst& ast);
CanonicalSql normalize_for_em(const std::string& sql, const DatabaseSchema& schema);

// True when both queries canonicalize identically. The gold query must
// parse; a prediction that fails to parse or resolve yields false.
bool exact_match(const std::string& pred, const std::string& gold,
                 const DatabaseSchema& schema);

struct ExactMatchDetail {
  bool match = false;
  std::string pred_error;  // parse/bind failure message, empty when pred parsed
};
ExactMatchDetail exact_match_detail(const std::string& pred, const std::string& gold,
                                    const DatabaseSchema& schema);

}  // namespace actsql::sql
