#pragma once

#include <string>
#include <utility>
#include <vector>

#include "actsql/sql/ast.hpp"

namespace actsql::sql {

// Clause-aware digest of one parsed query, the raw material for reasoning
// annotations. linked_columns lists (table, column) pairs referenced from
// SELECT/WHERE/HAVING/ORDER BY anywhere in the statement, first-use order,
// no duplicates; columns appearing only in GROUP BY or only in JOIN ON
// conditions are excluded. from_only_tables lists FROM tables owning none of
// the linked columns. values lists every string/number literal plus LIMIT
// counts, in query order, duplicates kept.
struct SqlSummary {
  std::vector<std::pair<int, int>> linked_columns;
  std::vector<int> from_only_tables;
  std::vector<std::string> values;
};

SqlSummary summarize(const SqlAst& ast);

}  // namespace actsql::sql
