#include "actsql/sql/summary.hpp"

#include <set>

namespace actsql::sql {

namespace {

enum class Role { select_, where_, group_, having_, order_, join_on };

bool linkable(Role r) {
  return r == Role::select_ || r == Role::where_ || r == Role::having_ || r == Role::order_;
}

struct Walker {
  std::vector<std::pair<std::pair<int, int>, Role>> columns;  // text order
  std::vector<int> from_tables;                               // text order, dup kept
  std::vector<std::string> values;

  void column(const ColumnRef& c, Role role) {
    if (c.star || c.table < 0) return;
    columns.push_back({{c.table, c.column}, role});
  }
  void col_unit(const ColUnit& cu, Role role) { column(cu.col, role); }
  void val_unit(const ValUnit& vu, Role role) {
    col_unit(vu.lhs, role);
    if (vu.rhs) col_unit(*vu.rhs, role);
  }
  void cond_value(const CondValue& v, Role role) {
    switch (v.kind) {
      case CondValue::Kind::number:
        values.push_back(v.lexeme);
        break;
      case CondValue::Kind::string:
        values.push_back(v.lexeme);
        break;
      case CondValue::Kind::null:
        break;
      case CondValue::Kind::column:
        col_unit(v.column, role);
        break;
      case CondValue::Kind::subquery:
        query(*v.subquery);
        break;
    }
  }
  void condition(const Condition& c, Role role) {
    if (c.op == CmpOp::exists) {
      if (c.exists_subquery) query(*c.exists_subquery);
      return;
    }
    val_unit(c.lhs, role);
    if (c.rhs1) cond_value(*c.rhs1, role);
    if (c.rhs2) cond_value(*c.rhs2, role);
  }
  void cond_list(const ConditionList& cl, Role role) {
    for (const auto& c : cl.conds) condition(c, role);
  }
  void query(const Query& q) {
    const SelectCore& core = q.core;
    for (const auto& item : core.items) val_unit(item.val, Role::select_);
    for (const auto& t : core.from) {
      if (t.subquery) query(*t.subquery);
      else if (t.table >= 0) from_tables.push_back(t.table);
    }
    cond_list(core.join_on, Role::join_on);
    cond_list(core.where, Role::where_);
    for (const auto& g : core.group_by) col_unit(g, Role::group_);
    cond_list(core.having, Role::having_);
    for (const auto& o : core.order_by) val_unit(o.val, Role::order_);
    if (core.limit) values.push_back(std::to_string(*core.limit));
    if (q.rhs) query(*q.rhs);
  }
};

}  // namespace

SqlSummary summarize(const SqlAst& ast) {
  Walker w;
  w.query(ast.query);

  SqlSummary out;
  std::set<std::pair<int, int>> seen;
  for (const auto& [col, role] : w.columns) {
    if (!linkable(role)) continue;
    if (seen.insert(col).second) out.linked_columns.push_back(col);
  }

  std::set<int> linked_tables;
  for (const auto& [t, _] : out.linked_columns) linked_tables.insert(t);
  std::set<int> seen_tables;
  for (int t : w.from_tables) {
    if (linked_tables.count(t)) continue;
    if (seen_tables.insert(t).second) out.from_only_tables.push_back(t);
  }
  out.values = std::move(w.values);
  return out;
}

}  // namespace actsql::sql
