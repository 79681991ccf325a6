#pragma once

#include "actsql/sql/ast.hpp"

namespace actsql::sql {

enum class Difficulty { easy, medium, hard, extra };

const char* difficulty_name(Difficulty d);

// Rule-based hardness bucket computed from component counts of the top-level
// query: clause presence, extra FROM tables, OR connectives and LIKE
// predicates form one tally; nested subqueries and set operations a second;
// aggregate/multi-condition counts a third. Threshold combinations of the
// three tallies pick the bucket.
Difficulty difficulty(const SqlAst& ast);

}  // namespace actsql::sql
