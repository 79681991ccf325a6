#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actsql/schema.hpp"

namespace actsql::sql {

enum class AggFn { none, max, min, count, sum, avg };
enum class ArithOp { none, sub, add, mul, div };
enum class CmpOp { eq, ne, gt, lt, ge, le, between, in, like, is, exists };
enum class SetOp { none, union_all, union_, intersect_, except_ };
enum class BoolConn { and_, or_ };

const char* agg_name(AggFn f);
const char* arith_name(ArithOp o);
const char* cmp_name(CmpOp o);
const char* set_op_name(SetOp o);

// A column resolved against the bound schema. `star` covers both bare `*`
// and `alias.*`; a plain column always carries valid table/column indices.
// Columns projected out of FROM-subqueries resolve to their underlying base
// column.
struct ColumnRef {
  bool star = false;
  int table = -1;
  int column = -1;
};

struct ColUnit {
  AggFn agg = AggFn::none;
  bool distinct = false;
  ColumnRef col;
};

struct ValUnit {
  ArithOp op = ArithOp::none;
  ColUnit lhs;
  std::optional<ColUnit> rhs;
};

struct SelectItem {
  AggFn agg = AggFn::none;  // aggregate applied around the value, if any
  bool distinct = false;    // DISTINCT inside the aggregate
  ValUnit val;
};

struct Query;

// Right-hand side of a comparison.
struct CondValue {
  enum class Kind { number, string, null, column, subquery };
  Kind kind = Kind::number;
  std::string lexeme;  // number as written / unquoted string content
  ColUnit column;
  std::shared_ptr<Query> subquery;
};

struct Condition {
  bool negated = false;
  CmpOp op = CmpOp::eq;
  ValUnit lhs;
  std::optional<CondValue> rhs1;
  std::optional<CondValue> rhs2;          // BETWEEN upper bound
  std::shared_ptr<Query> exists_subquery; // EXISTS (...)
};

// cond [conn cond]... ; conns.size() == conds.size() - 1 when non-empty.
struct ConditionList {
  std::vector<Condition> conds;
  std::vector<BoolConn> conns;
  bool empty() const { return conds.empty(); }
};

struct TableRef {
  int table = -1;                  // schema index; -1 for a subquery source
  std::shared_ptr<Query> subquery; // FROM (SELECT ...)
  std::string alias;               // as written, empty when absent
};

struct OrderItem {
  ValUnit val;
  bool desc = false;
};

struct SelectCore {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::vector<TableRef> from;
  ConditionList join_on;  // ON conditions in join order
  ConditionList where;
  std::vector<ColUnit> group_by;
  ConditionList having;
  std::vector<OrderItem> order_by;
  std::optional<long long> limit;
};

struct Query {
  SelectCore core;
  SetOp set_op = SetOp::none;
  std::shared_ptr<Query> rhs;
};

// A parsed statement bound to the schema it was resolved against. The schema
// must outlive the AST.
struct SqlAst {
  Query query;
  const DatabaseSchema* schema = nullptr;
};

bool equal(const Query& a, const Query& b);
bool equal(const SqlAst& a, const SqlAst& b);

// Prints a resolved AST back to SQL text. Aliases are resolved away: every
// column is written table.column with original schema casing. The output
// reparses to an equal AST.
std::string to_sql(const Query& q, const DatabaseSchema& schema);
std::string to_sql(const SqlAst& ast);

}  // namespace actsql::sql
