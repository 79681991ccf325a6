#pragma once

#include <string>

#include "actsql/schema.hpp"
#include "actsql/sql/ast.hpp"

namespace actsql::sql {

// Parses one statement of the supported SQL dialect (single SELECT cores
// with inner joins, nested subqueries, WHERE/GROUP BY/HAVING/ORDER BY/LIMIT
// and UNION/INTERSECT/EXCEPT chains) and binds every table and column
// against `schema`. Aliases (AS T1) are resolved away; unqualified columns
// resolve when exactly one table in scope owns them.
SqlAst parse_sql(const std::string& sql, const DatabaseSchema& schema);

}  // namespace actsql::sql
