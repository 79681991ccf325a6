#include <algorithm>

#include "actsql/sql/ast.hpp"

namespace actsql::sql {

const char* agg_name(AggFn f) {
  switch (f) {
    case AggFn::none: return "";
    case AggFn::max: return "max";
    case AggFn::min: return "min";
    case AggFn::count: return "count";
    case AggFn::sum: return "sum";
    case AggFn::avg: return "avg";
  }
  return "";
}

const char* arith_name(ArithOp o) {
  switch (o) {
    case ArithOp::none: return "";
    case ArithOp::sub: return "-";
    case ArithOp::add: return "+";
    case ArithOp::mul: return "*";
    case ArithOp::div: return "/";
  }
  return "";
}

const char* cmp_name(CmpOp o) {
  switch (o) {
    case CmpOp::eq: return "=";
    case CmpOp::ne: return "!=";
    case CmpOp::gt: return ">";
    case CmpOp::lt: return "<";
    case CmpOp::ge: return ">=";
    case CmpOp::le: return "<=";
    case CmpOp::between: return "BETWEEN";
    case CmpOp::in: return "IN";
    case CmpOp::like: return "LIKE";
    case CmpOp::is: return "IS";
    case CmpOp::exists: return "EXISTS";
  }
  return "=";
}

const char* set_op_name(SetOp o) {
  switch (o) {
    case SetOp::none: return "";
    case SetOp::union_all: return "UNION ALL";
    case SetOp::union_: return "UNION";
    case SetOp::intersect_: return "INTERSECT";
    case SetOp::except_: return "EXCEPT";
  }
  return "";
}

namespace {

bool equal_col(const ColumnRef& a, const ColumnRef& b) {
  return a.star == b.star && a.table == b.table && a.column == b.column;
}
bool equal_cu(const ColUnit& a, const ColUnit& b) {
  return a.agg == b.agg && a.distinct == b.distinct && equal_col(a.col, b.col);
}
bool equal_vu(const ValUnit& a, const ValUnit& b) {
  if (a.op != b.op || !equal_cu(a.lhs, b.lhs) || a.rhs.has_value() != b.rhs.has_value())
    return false;
  return !a.rhs || equal_cu(*a.rhs, *b.rhs);
}
bool equal_cv(const CondValue& a, const CondValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case CondValue::Kind::number:
    case CondValue::Kind::string:
      return a.lexeme == b.lexeme;
    case CondValue::Kind::null:
      return true;
    case CondValue::Kind::column:
      return equal_cu(a.column, b.column);
    case CondValue::Kind::subquery:
      return equal(*a.subquery, *b.subquery);
  }
  return false;
}
bool equal_cond(const Condition& a, const Condition& b) {
  if (a.negated != b.negated || a.op != b.op || !equal_vu(a.lhs, b.lhs)) return false;
  if (a.rhs1.has_value() != b.rhs1.has_value() || a.rhs2.has_value() != b.rhs2.has_value())
    return false;
  if (a.rhs1 && !equal_cv(*a.rhs1, *b.rhs1)) return false;
  if (a.rhs2 && !equal_cv(*a.rhs2, *b.rhs2)) return false;
  if ((a.exists_subquery != nullptr) != (b.exists_subquery != nullptr)) return false;
  if (a.exists_subquery && !equal(*a.exists_subquery, *b.exists_subquery)) return false;
  return true;
}
bool equal_cl(const ConditionList& a, const ConditionList& b) {
  if (a.conds.size() != b.conds.size() || a.conns != b.conns) return false;
  for (std::size_t i = 0; i < a.conds.size(); ++i)
    if (!equal_cond(a.conds[i], b.conds[i])) return false;
  return true;
}
bool equal_tref(const TableRef& a, const TableRef& b) {
  // Aliases are presentation, not structure.
  if (a.table != b.table) return false;
  if ((a.subquery != nullptr) != (b.subquery != nullptr)) return false;
  return !a.subquery || equal(*a.subquery, *b.subquery);
}
bool equal_core(const SelectCore& a, const SelectCore& b) {
  if (a.distinct != b.distinct || a.items.size() != b.items.size() ||
      a.from.size() != b.from.size() || a.group_by.size() != b.group_by.size() ||
      a.order_by.size() != b.order_by.size() || a.limit != b.limit)
    return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const auto& x = a.items[i];
    const auto& y = b.items[i];
    if (x.agg != y.agg || x.distinct != y.distinct || !equal_vu(x.val, y.val)) return false;
  }
  for (std::size_t i = 0; i < a.from.size(); ++i)
    if (!equal_tref(a.from[i], b.from[i])) return false;
  if (!equal_cl(a.join_on, b.join_on) || !equal_cl(a.where, b.where) ||
      !equal_cl(a.having, b.having))
    return false;
  for (std::size_t i = 0; i < a.group_by.size(); ++i)
    if (!equal_cu(a.group_by[i], b.group_by[i])) return false;
  for (std::size_t i = 0; i < a.order_by.size(); ++i) {
    if (a.order_by[i].desc != b.order_by[i].desc ||
        !equal_vu(a.order_by[i].val, b.order_by[i].val))
      return false;
  }
  return true;
}

struct Printer {
  const DatabaseSchema& schema;

  std::string col(const ColumnRef& c) const {
    if (c.star) {
      if (c.table >= 0) return schema.tables[c.table].name + ".*";
      return "*";
    }
    return schema.tables[c.table].name + "." + schema.tables[c.table].columns[c.column].name;
  }
  std::string col_unit(const ColUnit& cu) const {
    std::string inner = (cu.distinct ? "DISTINCT " : "") + col(cu.col);
    if (cu.agg == AggFn::none) return inner;
    return std::string(agg_name(cu.agg)) + "(" + inner + ")";
  }
  std::string val_unit(const ValUnit& vu) const {
    std::string out = col_unit(vu.lhs);
    if (vu.op != ArithOp::none && vu.rhs)
      out += std::string(" ") + arith_name(vu.op) + " " + col_unit(*vu.rhs);
    return out;
  }
  std::string select_item(const SelectItem& it) const {
    if (it.agg == AggFn::none) return val_unit(it.val);
    return std::string(agg_name(it.agg)) + "(" + (it.distinct ? "DISTINCT " : "") +
           val_unit(it.val) + ")";
  }
  static std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
      out += c;
      if (c == '\'') out += '\'';
    }
    out += "'";
    return out;
  }
  std::string cond_value(const CondValue& v) const {
    switch (v.kind) {
      case CondValue::Kind::number: return v.lexeme;
      case CondValue::Kind::string: return quote(v.lexeme);
      case CondValue::Kind::null: return "NULL";
      case CondValue::Kind::column: return col_unit(v.column);
      case CondValue::Kind::subquery: return "(" + query(*v.subquery) + ")";
    }
    return "";
  }
  std::string condition(const Condition& c) const {
    if (c.op == CmpOp::exists) {
      std::string out = c.negated ? "NOT EXISTS (" : "EXISTS (";
      return out + query(*c.exists_subquery) + ")";
    }
    std::string lhs = val_unit(c.lhs);
    switch (c.op) {
      case CmpOp::between:
        return lhs + (c.negated ? " NOT BETWEEN " : " BETWEEN ") + cond_value(*c.rhs1) +
               " AND " + cond_value(*c.rhs2);
      case CmpOp::in:
        return lhs + (c.negated ? " NOT IN " : " IN ") + cond_value(*c.rhs1);
      case CmpOp::like:
        return lhs + (c.negated ? " NOT LIKE " : " LIKE ") + cond_value(*c.rhs1);
      case CmpOp::is:
        return lhs + (c.negated ? " IS NOT NULL" : " IS NULL");
      default: {
        std::string out = c.negated ? "NOT " : "";
        return out + lhs + " " + cmp_name(c.op) + " " + cond_value(*c.rhs1);
      }
    }
  }
  std::string cond_list(const ConditionList& cl) const {
    std::string out;
    for (std::size_t i = 0; i < cl.conds.size(); ++i) {
      if (i) out += cl.conns[i - 1] == BoolConn::and_ ? " AND " : " OR ";
      out += condition(cl.conds[i]);
    }
    return out;
  }
  std::string table_ref(const TableRef& t) const {
    if (t.subquery) return "(" + query(*t.subquery) + ")";
    return schema.tables[t.table].name;
  }
  std::string query(const Query& q) const {
    const SelectCore& core = q.core;
    std::string out = "SELECT ";
    if (core.distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < core.items.size(); ++i) {
      if (i) out += " , ";
      out += select_item(core.items[i]);
    }
    out += " FROM ";
    for (std::size_t i = 0; i < core.from.size(); ++i) {
      if (i) out += " JOIN ";
      out += table_ref(core.from[i]);
    }
    if (!core.join_on.empty()) out += " ON " + cond_list(core.join_on);
    if (!core.where.empty()) out += " WHERE " + cond_list(core.where);
    if (!core.group_by.empty()) {
      out += " GROUP BY ";
      for (std::size_t i = 0; i < core.group_by.size(); ++i) {
        if (i) out += " , ";
        out += col_unit(core.group_by[i]);
      }
    }
    if (!core.having.empty()) out += " HAVING " + cond_list(core.having);
    if (!core.order_by.empty()) {
      out += " ORDER BY ";
      for (std::size_t i = 0; i < core.order_by.size(); ++i) {
        if (i) out += " , ";
        out += val_unit(core.order_by[i].val);
        out += core.order_by[i].desc ? " DESC" : " ASC";
      }
    }
    if (core.limit) out += " LIMIT " + std::to_string(*core.limit);
    if (q.set_op != SetOp::none && q.rhs)
      out += std::string(" ") + set_op_name(q.set_op) + " " + query(*q.rhs);
    return out;
  }
};

}  // namespace

bool equal(const Query& a, const Query& b) {
  if (!equal_core(a.core, b.core) || a.set_op != b.set_op) return false;
  if ((a.rhs != nullptr) != (b.rhs != nullptr)) return false;
  return !a.rhs || equal(*a.rhs, *b.rhs);
}

bool equal(const SqlAst& a, const SqlAst& b) { return equal(a.query, b.query); }

std::string to_sql(const Query& q, const DatabaseSchema& schema) {
  return Printer{schema}.query(q);
}

std::string to_sql(const SqlAst& ast) { return to_sql(ast.query, *ast.schema); }

}  // namespace actsql::sql
