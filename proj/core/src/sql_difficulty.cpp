#include "actsql/sql/difficulty.hpp"

namespace actsql::sql {

const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
    case Difficulty::extra: return "extra";
  }
  return "easy";
}

namespace {

int count_or(const ConditionList& cl) {
  int n = 0;
  for (auto conn : cl.conns)
    if (conn == BoolConn::or_) ++n;
  return n;
}

int count_like(const ConditionList& cl) {
  int n = 0;
  for (const auto& c : cl.conds)
    if (c.op == CmpOp::like) ++n;
  return n;
}

int component1(const Query& q) {
  const SelectCore& core = q.core;
  int n = 0;
  if (!core.where.empty()) ++n;
  if (!core.group_by.empty()) ++n;
  if (!core.order_by.empty()) ++n;
  if (core.limit) ++n;
  n += static_cast<int>(core.from.size()) - 1;
  n += count_or(core.join_on) + count_or(core.where) + count_or(core.having);
  n += count_like(core.join_on) + count_like(core.where) + count_like(core.having);
  return n;
}

int nested_in(const ConditionList& cl) {
  int n = 0;
  for (const auto& c : cl.conds) {
    if (c.exists_subquery) ++n;
    if (c.rhs1 && c.rhs1->kind == CondValue::Kind::subquery) ++n;
    if (c.rhs2 && c.rhs2->kind == CondValue::Kind::subquery) ++n;
  }
  return n;
}

int component2(const Query& q) {
  const SelectCore& core = q.core;
  int n = nested_in(core.join_on) + nested_in(core.where) + nested_in(core.having);
  if (q.set_op != SetOp::none && q.rhs) ++n;
  return n;
}

int count_negated(const ConditionList& cl) {
  int n = 0;
  for (const auto& c : cl.conds)
    if (c.negated) ++n;
  return n;
}

int others(const Query& q) {
  const SelectCore& core = q.core;
  // The aggregation tally deliberately includes negated conditions, and for
  // HAVING also the and/or connectives themselves; multi-condition and
  // multi-column counts sit beside it.
  int agg = 0;
  for (const auto& it : core.items)
    if (it.agg != AggFn::none) ++agg;
  agg += count_negated(core.where);
  for (const auto& g : core.group_by)
    if (g.agg != AggFn::none) ++agg;
  if (!core.order_by.empty()) {
    for (const auto& o : core.order_by) {
      if (o.val.lhs.agg != AggFn::none) ++agg;
      if (o.val.rhs && o.val.rhs->agg != AggFn::none) ++agg;
    }
  }
  agg += count_negated(core.having);
  agg += static_cast<int>(core.having.conns.size());

  int n = 0;
  if (agg > 1) ++n;
  if (core.items.size() > 1) ++n;
  if (core.where.conds.size() > 1) ++n;
  if (core.group_by.size() > 1) ++n;
  return n;
}

}  // namespace

Difficulty difficulty(const SqlAst& ast) {
  const Query& q = ast.query;
  int c1 = component1(q);
  int c2 = component2(q);
  int ot = others(q);

  if (c1 <= 1 && ot == 0 && c2 == 0) return Difficulty::easy;
  if ((ot <= 2 && c1 <= 1 && c2 == 0) || (c1 <= 2 && ot < 2 && c2 == 0))
    return Difficulty::medium;
  if ((ot > 2 && c1 <= 2 && c2 == 0) || (c1 > 2 && c1 <= 3 && ot <= 2 && c2 == 0) ||
      (c1 <= 1 && ot == 0 && c2 <= 1))
    return Difficulty::hard;
  return Difficulty::extra;
}

}  // namespace actsql::sql
