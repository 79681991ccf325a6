#include "actsql/sql/canonical.hpp"

#include <algorithm>

#include "actsql/errors.hpp"
#include "actsql/sql/parser.hpp"
#include "actsql/text.hpp"

namespace actsql::sql {

namespace {

struct Canonicalizer {
  const DatabaseSchema& schema;

  std::string col(const ColumnRef& c) const {
    if (c.star) {
      if (c.table >= 0) return text::to_lower(schema.tables[c.table].name) + ".*";
      return "*";
    }
    return text::to_lower(schema.tables[c.table].name) + "." +
           text::to_lower(schema.tables[c.table].columns[c.column].name);
  }
  std::string col_unit(const ColUnit& cu) const {
    std::string inner = (cu.distinct ? "distinct " : "") + col(cu.col);
    if (cu.agg == AggFn::none) return inner;
    return std::string(agg_name(cu.agg)) + "(" + inner + ")";
  }
  std::string val_unit(const ValUnit& vu) const {
    std::string out = col_unit(vu.lhs);
    if (vu.op != ArithOp::none && vu.rhs)
      out += std::string(arith_name(vu.op)) + col_unit(*vu.rhs);
    return out;
  }
  std::string select_item(const SelectItem& it) const {
    if (it.agg == AggFn::none) return val_unit(it.val);
    return std::string(agg_name(it.agg)) + "(" + (it.distinct ? "distinct " : "") +
           val_unit(it.val) + ")";
  }
  std::string cond_value(const CondValue& v) const {
    switch (v.kind) {
      case CondValue::Kind::number:
      case CondValue::Kind::string:
        return "?";
      case CondValue::Kind::null:
        return "null";
      case CondValue::Kind::column:
        return col_unit(v.column);
      case CondValue::Kind::subquery:
        return "(" + query(*v.subquery) + ")";
    }
    return "?";
  }
  std::string condition(const Condition& c) const {
    std::string out = c.negated ? "not " : "";
    if (c.op == CmpOp::exists) return out + "exists (" + query(*c.exists_subquery) + ")";
    out += val_unit(c.lhs);
    out += " ";
    out += text::to_lower(cmp_name(c.op));
    if (c.op == CmpOp::between) {
      out += " " + cond_value(*c.rhs1) + " and " + cond_value(*c.rhs2);
    } else if (c.rhs1) {
      out += " " + cond_value(*c.rhs1);
    }
    return out;
  }
  static std::string sorted_set(std::vector<std::string> parts) {
    std::sort(parts.begin(), parts.end());
    return "{" + text::join(parts, ",") + "}";
  }
  std::string cond_set(const ConditionList& cl) const {
    std::vector<std::string> parts;
    for (const auto& c : cl.conds) parts.push_back(condition(c));
    return sorted_set(std::move(parts));
  }
  // Equality join conditions compare symmetrically: a = b equals b = a.
  std::string join_cond_set(const ConditionList& cl) const {
    std::vector<std::string> parts;
    for (const auto& c : cl.conds) {
      if (c.op == CmpOp::eq && !c.negated && c.rhs1 &&
          c.rhs1->kind == CondValue::Kind::column) {
        std::string a = val_unit(c.lhs);
        std::string b = col_unit(c.rhs1->column);
        if (b < a) std::swap(a, b);
        parts.push_back(a + "=" + b);
      } else {
        parts.push_back(condition(c));
      }
    }
    return sorted_set(std::move(parts));
  }
  std::string query(const Query& q) const {
    const SelectCore& core = q.core;
    std::string out = "select";
    if (core.distinct) out += " distinct";
    {
      std::vector<std::string> parts;
      for (const auto& it : core.items) parts.push_back(select_item(it));
      out += sorted_set(std::move(parts));
    }
    out += "|from";
    {
      std::vector<std::string> parts;
      for (const auto& t : core.from) {
        if (t.subquery) parts.push_back("(" + query(*t.subquery) + ")");
        else parts.push_back(text::to_lower(schema.tables[t.table].name));
      }
      out += sorted_set(std::move(parts));
    }
    out += "|on" + join_cond_set(core.join_on);
    out += "|where" + cond_set(core.where);
    {
      std::vector<std::string> parts;
      for (const auto& g : core.group_by) parts.push_back(col_unit(g));
      out += "|group" + sorted_set(std::move(parts));
    }
    out += "|having" + cond_set(core.having);
    out += "|order[";
    for (std::size_t i = 0; i < core.order_by.size(); ++i) {
      if (i) out += ",";
      out += val_unit(core.order_by[i].val);
      out += core.order_by[i].desc ? " desc" : " asc";
    }
    out += "]";
    out += core.limit ? "|limit" : "|nolimit";
    if (q.set_op != SetOp::none && q.rhs) {
      out += "|";
      out += text::to_lower(set_op_name(q.set_op));
      out += "(" + query(*q.rhs) + ")";
    }
    return out;
  }
};

}  // namespace

CanonicalSql normalize_for_em(const SqlAst& ast) {
  return CanonicalSql{Canonicalizer{*ast.schema}.query(ast.query)};
}

CanonicalSql normalize_for_em(const std::string& sql, const DatabaseSchema& schema) {
  return normalize_for_em(parse_sql(sql, schema));
}

ExactMatchDetail exact_match_detail(const std::string& pred, const std::string& gold,
                                    const DatabaseSchema& schema) {
  CanonicalSql gold_canon = normalize_for_em(gold, schema);
  ExactMatchDetail out;
  try {
    CanonicalSql pred_canon = normalize_for_em(pred, schema);
    out.match = pred_canon == gold_canon;
  } catch (const Error& e) {
    out.match = false;
    out.pred_error = e.what();
  }
  return out;
}

bool exact_match(const std::string& pred, const std::string& gold,
                 const DatabaseSchema& schema) {
  return exact_match_detail(pred, gold, schema).match;
}

}  // namespace actsql::sql
