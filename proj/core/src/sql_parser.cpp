#include "actsql/sql/parser.hpp"

#include <algorithm>
#include <unordered_set>

#include "actsql/errors.hpp"
#include "actsql/sql/lexer.hpp"
#include "actsql/text.hpp"

namespace actsql::sql {

namespace {

const std::unordered_set<std::string> kReserved = {
    "select", "from",  "where",  "group",     "order", "limit", "having", "by",
    "join",   "on",    "as",     "union",     "intersect", "except", "and", "or",
    "not",    "in",    "like",   "between",   "exists", "is",   "null",  "distinct",
    "asc",    "desc",  "all",    "max",       "min",   "count", "sum",  "avg"};

struct ScopeEntry {
  std::string alias_lower;  // explicit alias, lowercased; empty when none
  int table = -1;           // schema table index; -1 for derived
  // Columns a derived table exposes: output name (lower) -> base column.
  std::vector<std::pair<std::string, ColumnRef>> exposed;
  bool derived = false;
};

struct Scope {
  const Scope* parent = nullptr;
  std::vector<ScopeEntry> entries;
};

class Parser {
 public:
  Parser(const std::string& sql, const DatabaseSchema& schema)
      : sql_(sql), schema_(schema), toks_(lex_sql(sql)) {}

  SqlAst parse() {
    SqlAst ast;
    ast.schema = &schema_;
    ast.query = parse_query(nullptr);
    if (peek().text == ";") advance();
    expect_end();
    return ast;
  }

 private:
  const std::string& sql_;
  const DatabaseSchema& schema_;
  std::vector<Token> toks_;
  std::size_t at_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = at_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& advance() { return toks_[std::min(at_++, toks_.size() - 1)]; }

  bool is_kw(const Token& t, const char* kw) const {
    return t.kind == TokKind::identifier && text::iequals(t.text, kw);
  }
  bool accept_kw(const char* kw) {
    if (is_kw(peek(), kw)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw))
      throw SqlSyntaxError(std::string("expected '") + kw + "'", peek().pos);
  }
  bool accept_punct(const char* p) {
    if (peek().kind == TokKind::punct && peek().text == p) {
      advance();
      return true;
    }
    return false;
  }
  void expect_punct(const char* p) {
    if (!accept_punct(p))
      throw SqlSyntaxError(std::string("expected '") + p + "'", peek().pos);
  }
  void expect_end() {
    if (peek().kind != TokKind::end)
      throw SqlSyntaxError("unexpected trailing input '" + peek().text + "'", peek().pos);
  }

  static bool is_agg_kw(const Token& t, AggFn& out) {
    static const std::pair<const char*, AggFn> kAggs[] = {{"max", AggFn::max},
                                                          {"min", AggFn::min},
                                                          {"count", AggFn::count},
                                                          {"sum", AggFn::sum},
                                                          {"avg", AggFn::avg}};
    if (t.kind != TokKind::identifier) return false;
    for (const auto& [name, fn] : kAggs) {
      if (text::iequals(t.text, name)) {
        out = fn;
        return true;
      }
    }
    return false;
  }

  bool starts_set_op() const {
    return is_kw(peek(), "union") || is_kw(peek(), "intersect") || is_kw(peek(), "except");
  }

  Query parse_query(const Scope* parent) {
    Query q;
    q.core = parse_select_core(parent);
    if (starts_set_op()) {
      const Token& op = advance();
      if (text::iequals(op.text, "union")) {
        q.set_op = accept_kw("all") ? SetOp::union_all : SetOp::union_;
      } else if (text::iequals(op.text, "intersect")) {
        q.set_op = SetOp::intersect_;
      } else {
        q.set_op = SetOp::except_;
      }
      q.rhs = std::make_shared<Query>(parse_query(parent));
    }
    return q;
  }

  SelectCore parse_select_core(const Scope* parent) {
    expect_kw("select");
    SelectCore core;
    Scope scope;
    scope.parent = parent;

    core.distinct = accept_kw("distinct");

    // Select items are parsed before FROM is known, so resolution of the
    // item expressions is deferred until the scope exists.
    std::size_t select_start = at_;
    skip_until_from();
    std::size_t select_end = at_;

    expect_kw("from");
    parse_from(core, scope);

    // Revisit the select list with the populated scope.
    std::size_t resume = at_;
    at_ = select_start;
    parse_select_items(core, scope, select_end);
    at_ = resume;

    if (accept_kw("where")) core.where = parse_condition_list(scope);
    if (accept_kw("group")) {
      expect_kw("by");
      core.group_by.push_back(parse_col_unit(scope));
      while (accept_punct(",")) core.group_by.push_back(parse_col_unit(scope));
    }
    if (accept_kw("having")) core.having = parse_condition_list(scope);
    if (accept_kw("order")) {
      expect_kw("by");
      core.order_by.push_back(parse_order_item(scope));
      while (accept_punct(",")) core.order_by.push_back(parse_order_item(scope));
    }
    if (accept_kw("limit")) {
      const Token& t = advance();
      if (t.kind != TokKind::number || t.text.find('.') != std::string::npos)
        throw SqlSyntaxError("LIMIT expects an integer", t.pos);
      core.limit = std::stoll(t.text);
    }
    return core;
  }

  // Skips tokens from the select list until the matching FROM, respecting
  // parentheses (subqueries cannot appear in the dialect's select list, but
  // aggregate parens do).
  void skip_until_from() {
    int depth = 0;
    while (true) {
      const Token& t = peek();
      if (t.kind == TokKind::end)
        throw SqlSyntaxError("expected FROM clause", t.pos);
      if (t.kind == TokKind::punct && t.text == "(") ++depth;
      if (t.kind == TokKind::punct && t.text == ")") --depth;
      if (depth == 0 && is_kw(t, "from")) return;
      advance();
    }
  }

  void parse_select_items(SelectCore& core, const Scope& scope, std::size_t end) {
    if (at_ >= end) throw SqlSyntaxError("empty select list", peek().pos);
    while (true) {
      core.items.push_back(parse_select_item(scope));
      if (at_ >= end) break;
      expect_punct(",");
      if (at_ >= end) throw SqlSyntaxError("dangling comma in select list", peek().pos);
    }
  }

  SelectItem parse_select_item(const Scope& scope) {
    SelectItem item;
    AggFn agg;
    if (is_agg_kw(peek(), agg) && peek(1).kind == TokKind::punct && peek(1).text == "(") {
      advance();
      advance();
      item.agg = agg;
      item.distinct = accept_kw("distinct");
      item.val = parse_val_unit(scope);
      expect_punct(")");
      // Arithmetic around an aggregate: max(a) - min(b).
      ArithOp op = peek_arith();
      if (op != ArithOp::none) {
        advance();
        ValUnit vu;
        vu.op = op;
        ColUnit lhs;
        lhs.agg = item.agg;
        lhs.distinct = item.distinct;
        lhs.col = item.val.lhs.col;
        vu.lhs = lhs;
        vu.rhs = parse_col_unit(scope);
        item.agg = AggFn::none;
        item.distinct = false;
        item.val = vu;
      }
      return item;
    }
    item.val = parse_val_unit(scope);
    return item;
  }

  ArithOp peek_arith() const {
    if (peek().kind != TokKind::punct) return ArithOp::none;
    const std::string& p = peek().text;
    if (p == "-") return ArithOp::sub;
    if (p == "+") return ArithOp::add;
    if (p == "*") return ArithOp::mul;
    if (p == "/") return ArithOp::div;
    return ArithOp::none;
  }

  ValUnit parse_val_unit(const Scope& scope) {
    ValUnit vu;
    vu.lhs = parse_col_unit(scope);
    ArithOp op = peek_arith();
    // `*` right after a column could be this dialect's multiplication only
    // inside an arithmetic expression; a lone trailing star never follows a
    // column, so treating it as an operator is safe here.
    if (op != ArithOp::none) {
      advance();
      vu.op = op;
      vu.rhs = parse_col_unit(scope);
    }
    return vu;
  }

  ColUnit parse_col_unit(const Scope& scope) {
    ColUnit cu;
    AggFn agg;
    if (is_agg_kw(peek(), agg) && peek(1).kind == TokKind::punct && peek(1).text == "(") {
      advance();
      advance();
      cu.agg = agg;
      cu.distinct = accept_kw("distinct");
      cu.col = parse_column_ref(scope);
      expect_punct(")");
      return cu;
    }
    cu.col = parse_column_ref(scope);
    return cu;
  }

  ColumnRef parse_column_ref(const Scope& scope) {
    if (accept_punct("*")) {
      ColumnRef r;
      r.star = true;
      return r;
    }
    const Token& first = peek();
    if (first.kind != TokKind::identifier)
      throw SqlSyntaxError("expected column reference, got '" + first.text + "'", first.pos);
    advance();
    if (accept_punct(".")) {
      if (accept_punct("*")) {
        ColumnRef r;
        r.star = true;
        r.table = resolve_table_name(scope, first);
        return r;
      }
      const Token& colTok = peek();
      if (colTok.kind != TokKind::identifier)
        throw SqlSyntaxError("expected column name after '.'", colTok.pos);
      advance();
      return resolve_qualified(scope, first, colTok);
    }
    return resolve_unqualified(scope, first);
  }

  // Resolves a table name or alias to a schema table index (derived tables
  // yield -1 and are only valid for `alias.*`).
  int resolve_table_name(const Scope& scope, const Token& name) const {
    const ScopeEntry* entry = find_entry(scope, name.text);
    if (!entry) throw UnknownTableError("unknown table or alias '" + name.text + "'");
    return entry->table;
  }

  const ScopeEntry* find_entry(const Scope& scope, const std::string& name) const {
    std::string lower = text::to_lower(name);
    for (const Scope* s = &scope; s; s = s->parent) {
      for (const auto& e : s->entries) {
        if (!e.alias_lower.empty() && e.alias_lower == lower) return &e;
        if (e.table >= 0 && text::iequals(schema_.tables[e.table].name, name)) return &e;
      }
    }
    return nullptr;
  }

  ColumnRef resolve_qualified(const Scope& scope, const Token& tab, const Token& col) const {
    const ScopeEntry* entry = find_entry(scope, tab.text);
    if (!entry) throw UnknownTableError("unknown table or alias '" + tab.text + "'");
    if (entry->derived) {
      std::string lower = text::to_lower(col.text);
      for (const auto& [name, ref] : entry->exposed)
        if (name == lower) return ref;
      throw UnresolvableColumnError("column '" + col.text + "' is not exposed by subquery '" +
                                    tab.text + "'");
    }
    int ci = schema_.tables[entry->table].column_index(col.text);
    if (ci < 0)
      throw UnresolvableColumnError("table '" + schema_.tables[entry->table].name +
                                    "' has no column '" + col.text + "'");
    ColumnRef r;
    r.table = entry->table;
    r.column = ci;
    return r;
  }

  ColumnRef resolve_unqualified(const Scope& scope, const Token& col) const {
    for (const Scope* s = &scope; s; s = s->parent) {
      ColumnRef found;
      int hits = 0;
      for (const auto& e : s->entries) {
        if (e.derived) {
          std::string lower = text::to_lower(col.text);
          for (const auto& [name, ref] : e.exposed) {
            if (name == lower) {
              found = ref;
              ++hits;
              break;
            }
          }
          continue;
        }
        int ci = schema_.tables[e.table].column_index(col.text);
        if (ci >= 0) {
          found.table = e.table;
          found.column = ci;
          found.star = false;
          ++hits;
        }
      }
      if (hits == 1) return found;
      if (hits > 1)
        throw AmbiguousColumnError("column '" + col.text + "' is ambiguous in this scope");
    }
    throw UnresolvableColumnError("cannot resolve column '" + col.text + "'");
  }

  void parse_from(SelectCore& core, Scope& scope) {
    core.from.push_back(parse_table_ref(scope));
    while (true) {
      if (accept_punct(",")) {
        core.from.push_back(parse_table_ref(scope));
        continue;
      }
      if (accept_kw("join")) {
        core.from.push_back(parse_table_ref(scope));
        if (accept_kw("on")) {
          append_condition(core.join_on, parse_condition(scope));
          while (is_kw(peek(), "and") || is_kw(peek(), "or")) {
            BoolConn conn = text::iequals(advance().text, "and") ? BoolConn::and_ : BoolConn::or_;
            core.join_on.conns.push_back(conn);
            core.join_on.conds.push_back(parse_condition(scope));
          }
        }
        continue;
      }
      break;
    }
  }

  static void append_condition(ConditionList& list, Condition cond) {
    list.conds.push_back(std::move(cond));
  }

  TableRef parse_table_ref(Scope& scope) {
    TableRef ref;
    ScopeEntry entry;
    if (accept_punct("(")) {
      Query sub = parse_query(scope.parent);
      expect_punct(")");
      ref.subquery = std::make_shared<Query>(std::move(sub));
      entry.derived = true;
      entry.exposed = exposed_columns(*ref.subquery);
    } else {
      const Token& name = peek();
      if (name.kind != TokKind::identifier)
        throw SqlSyntaxError("expected table name", name.pos);
      advance();
      int ti = schema_.table_index(name.text);
      if (ti < 0) throw UnknownTableError("unknown table '" + name.text + "'");
      ref.table = ti;
      entry.table = ti;
    }
    if (accept_kw("as")) {
      const Token& alias = peek();
      if (alias.kind != TokKind::identifier)
        throw SqlSyntaxError("expected alias after AS", alias.pos);
      advance();
      ref.alias = alias.text;
    } else if (peek().kind == TokKind::identifier &&
               !kReserved.count(text::to_lower(peek().text))) {
      ref.alias = advance().text;
    }
    entry.alias_lower = text::to_lower(ref.alias);
    scope.entries.push_back(std::move(entry));
    return ref;
  }

  // Output columns a FROM-subquery makes addressable from the outer query:
  // plain column items under their own name, star items fan out to every
  // column of the subquery's FROM tables.
  std::vector<std::pair<std::string, ColumnRef>> exposed_columns(const Query& q) const {
    std::vector<std::pair<std::string, ColumnRef>> out;
    for (const auto& item : q.core.items) {
      const ColumnRef& col = item.val.lhs.col;
      if (item.val.op == ArithOp::none && item.agg == AggFn::none &&
          item.val.lhs.agg == AggFn::none && !col.star && col.table >= 0) {
        out.emplace_back(
            text::to_lower(schema_.tables[col.table].columns[col.column].name), col);
      } else if (col.star && item.agg == AggFn::none && item.val.lhs.agg == AggFn::none) {
        for (const auto& tref : q.core.from) {
          if (tref.table >= 0) {
            const auto& t = schema_.tables[tref.table];
            for (std::size_t ci = 0; ci < t.columns.size(); ++ci) {
              ColumnRef r;
              r.table = tref.table;
              r.column = static_cast<int>(ci);
              out.emplace_back(text::to_lower(t.columns[ci].name), r);
            }
          } else if (tref.subquery) {
            for (auto& inner : exposed_columns(*tref.subquery)) out.push_back(inner);
          }
        }
      }
    }
    return out;
  }

  ConditionList parse_condition_list(const Scope& scope) {
    ConditionList list;
    list.conds.push_back(parse_condition(scope));
    while (is_kw(peek(), "and") || is_kw(peek(), "or")) {
      list.conns.push_back(text::iequals(advance().text, "and") ? BoolConn::and_
                                                                : BoolConn::or_);
      list.conds.push_back(parse_condition(scope));
    }
    return list;
  }

  Condition parse_condition(const Scope& scope) {
    Condition cond;
    if (accept_kw("not")) cond.negated = true;
    if (accept_kw("exists")) {
      expect_punct("(");
      cond.op = CmpOp::exists;
      cond.exists_subquery = std::make_shared<Query>(parse_query(&scope));
      expect_punct(")");
      return cond;
    }
    cond.lhs = parse_val_unit(scope);
    if (accept_kw("not")) cond.negated = true;

    if (accept_kw("between")) {
      cond.op = CmpOp::between;
      cond.rhs1 = parse_cond_value(scope);
      expect_kw("and");
      cond.rhs2 = parse_cond_value(scope);
      return cond;
    }
    if (accept_kw("in")) {
      cond.op = CmpOp::in;
      expect_punct("(");
      CondValue v;
      v.kind = CondValue::Kind::subquery;
      v.subquery = std::make_shared<Query>(parse_query(&scope));
      expect_punct(")");
      cond.rhs1 = std::move(v);
      return cond;
    }
    if (accept_kw("like")) {
      cond.op = CmpOp::like;
      cond.rhs1 = parse_cond_value(scope);
      return cond;
    }
    if (accept_kw("is")) {
      cond.op = CmpOp::is;
      if (accept_kw("not")) cond.negated = true;
      expect_kw("null");
      CondValue v;
      v.kind = CondValue::Kind::null;
      cond.rhs1 = std::move(v);
      return cond;
    }
    const Token& op = peek();
    if (op.kind != TokKind::punct)
      throw SqlSyntaxError("expected comparison operator, got '" + op.text + "'", op.pos);
    if (op.text == "=") cond.op = CmpOp::eq;
    else if (op.text == "!=" || op.text == "<>") cond.op = CmpOp::ne;
    else if (op.text == ">") cond.op = CmpOp::gt;
    else if (op.text == "<") cond.op = CmpOp::lt;
    else if (op.text == ">=") cond.op = CmpOp::ge;
    else if (op.text == "<=") cond.op = CmpOp::le;
    else
      throw SqlSyntaxError("expected comparison operator, got '" + op.text + "'", op.pos);
    advance();
    cond.rhs1 = parse_cond_value(scope);
    return cond;
  }

  CondValue parse_cond_value(const Scope& scope) {
    CondValue v;
    const Token& t = peek();
    if (t.kind == TokKind::number) {
      advance();
      v.kind = CondValue::Kind::number;
      v.lexeme = t.text;
      return v;
    }
    if (t.kind == TokKind::punct && (t.text == "-" || t.text == "+") &&
        peek(1).kind == TokKind::number) {
      advance();
      const Token& num = advance();
      v.kind = CondValue::Kind::number;
      v.lexeme = (t.text == "-" ? "-" : "") + num.text;
      return v;
    }
    if (t.kind == TokKind::string) {
      advance();
      v.kind = CondValue::Kind::string;
      v.lexeme = t.text;
      return v;
    }
    if (t.kind == TokKind::punct && t.text == "(") {
      advance();
      v.kind = CondValue::Kind::subquery;
      v.subquery = std::make_shared<Query>(parse_query(&scope));
      expect_punct(")");
      return v;
    }
    if (is_kw(t, "null")) {
      advance();
      v.kind = CondValue::Kind::null;
      return v;
    }
    v.kind = CondValue::Kind::column;
    v.column = parse_col_unit(scope);
    return v;
  }

  OrderItem parse_order_item(const Scope& scope) {
    OrderItem item;
    item.val = parse_val_unit(scope);
    if (accept_kw("desc")) item.desc = true;
    else if (accept_kw("asc")) item.desc = false;
    return item;
  }
};

}  // namespace

SqlAst parse_sql(const std::string& sql, const DatabaseSchema& schema) {
  std::string trimmed = text::trim(sql);
  if (trimmed.empty()) throw SqlSyntaxError("empty statement", 0);
  Parser p(trimmed, schema);
  return p.parse();
}

}  // namespace actsql::sql
