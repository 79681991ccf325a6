#include "actsql/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "actsql/content.hpp"
#include "actsql/errors.hpp"
#include "actsql/sql/canonical.hpp"
#include "actsql/sql/parser.hpp"
#include "actsql/sqlite_db.hpp"
#include "actsql/text.hpp"
#include "parallel.hpp"

namespace actsql {

namespace fs = std::filesystem;

std::vector<PredictedSql> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open predictions: " + path);
  std::vector<PredictedSql> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedDocumentError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("source_id") || !rec.contains("sql"))
      throw MalformedDocumentError(path + ":" + std::to_string(lineno) +
                                   ": record needs source_id and sql");
    out.push_back({rec.at("source_id").get<std::string>(), rec.at("sql").get<std::string>()});
  }
  return out;
}

namespace {

bool cell_is_number(const Cell& c) {
  return c.kind == Cell::Kind::integer || c.kind == Cell::Kind::real;
}

double cell_number(const Cell& c) {
  return c.kind == Cell::Kind::integer ? static_cast<double>(c.i) : c.d;
}

bool cells_equal(const Cell& a, const Cell& b) {
  if (a.kind == Cell::Kind::null || b.kind == Cell::Kind::null) return a.kind == b.kind;
  if (cell_is_number(a) && cell_is_number(b)) {
    if (a.kind == Cell::Kind::integer && b.kind == Cell::Kind::integer) return a.i == b.i;
    double x = cell_number(a), y = cell_number(b);
    return std::fabs(x - y) <= std::max(1e-9, 1e-6 * std::max(std::fabs(x), std::fabs(y)));
  }
  if (a.kind != b.kind) return false;
  return a.s == b.s;
}

int cell_rank(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::null: return 0;
    case Cell::Kind::integer:
    case Cell::Kind::real: return 1;
    case Cell::Kind::text: return 2;
    case Cell::Kind::blob: return 3;
  }
  return 4;
}

bool cell_less(const Cell& a, const Cell& b) {
  int ra = cell_rank(a), rb = cell_rank(b);
  if (ra != rb) return ra < rb;
  if (ra == 1) {
    double x = cell_number(a), y = cell_number(b);
    if (x != y) return x < y;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  }
  return a.s < b.s;
}

bool row_less(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

bool rows_equal(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!cells_equal(a[i], b[i])) return false;
  return true;
}

bool multiset_rows_equal(std::vector<std::vector<Cell>> a, std::vector<std::vector<Cell>> b) {
  std::sort(a.begin(), a.end(), row_less);
  std::sort(b.begin(), b.end(), row_less);
  bool ok = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!rows_equal(a[i], b[i])) {
      ok = false;
      break;
    }
  }
  if (ok) return true;
  // Float tolerance can break the sorted alignment; small results get the
  // quadratic matching instead.
  if (a.size() > 2000) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& row : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || !rows_equal(row, b[j])) continue;
      used[j] = true;
      found = true;
      break;
    }
    if (!found) return false;
  }
  return true;
}

bool results_equal(const ResultSet& pred, const ResultSet& gold, bool ordered) {
  if (pred.rows.size() != gold.rows.size()) return false;
  if (pred.columns.size() != gold.columns.size()) return false;
  if (ordered) {
    for (std::size_t i = 0; i < pred.rows.size(); ++i)
      if (!rows_equal(pred.rows[i], gold.rows[i])) return false;
    return true;
  }
  return multiset_rows_equal(pred.rows, gold.rows);
}

// Top-level ORDER BY detection: parse when a schema is at hand, otherwise a
// quote-aware scan at parenthesis depth zero.
bool gold_orders_rows(const std::string& gold, const DatabaseSchema* schema) {
  if (schema) {
    try {
      sql::SqlAst ast = sql::parse_sql(gold, *schema);
      const sql::Query* q = &ast.query;
      while (q) {
        if (!q->core.order_by.empty()) return true;
        q = q->rhs.get();
      }
      return false;
    } catch (const Error&) {
    }
  }
  std::string low = text::to_lower(gold);
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < low.size(); ++i) {
    char c = low[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    } else if (depth == 0 && low.compare(i, 8, "order by") == 0) {
      return true;
    }
  }
  return false;
}

}  // namespace

bool execution_match(const std::string& pred, const std::string& gold,
                     const std::string& db_path, const DatabaseSchema* schema,
                     std::chrono::milliseconds timeout, std::string* failure) {
  SqliteDb db(db_path, SqliteDb::OpenMode::read_only);
  ResultSet gold_rows;
  try {
    gold_rows = db.query(gold, timeout);
  } catch (const Error& e) {
    throw GoldExecutionFailureError("gold query failed on " + db_path + ": " + e.what());
  }
  ResultSet pred_rows;
  try {
    pred_rows = db.query(pred, timeout);
  } catch (const Error& e) {
    if (failure) *failure = e.what();
    return false;
  }
  bool match = results_equal(pred_rows, gold_rows, gold_orders_rows(gold, schema));
  if (!match && failure && failure->empty()) *failure = "result sets differ";
  return match;
}

bool test_suite_match(const std::string& pred, const std::string& gold,
                      const std::vector<std::string>& variant_db_paths,
                      const DatabaseSchema* schema, std::chrono::milliseconds timeout,
                      std::string* failure) {
  if (variant_db_paths.empty())
    throw ConfigInvariantError("test-suite match needs at least one variant database");
  for (const auto& path : variant_db_paths) {
    if (!execution_match(pred, gold, path, schema, timeout, failure)) return false;
  }
  return true;
}

std::vector<std::string> variant_databases(const std::string& variants_root,
                                           const std::string& db_id) {
  std::vector<std::string> out;
  if (variants_root.empty()) return out;
  fs::path dir = fs::path(variants_root) / db_id;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".sqlite")
      out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Verdict score_one(const Example& gold, const PredictedSql* pred, const SchemaCatalog& catalog,
                  const ScoreOptions& options) {
  Verdict v;
  v.source_id = gold.source_id;
  const DatabaseSchema& schema = catalog.db(gold.db_id);

  sql::SqlAst gold_ast = sql::parse_sql(gold.gold_sql, schema);
  v.difficulty = sql::difficulty(gold_ast);

  if (!pred) {
    v.failure = "missing prediction";
    if (!options.db_root.empty()) v.ex = false;
    if (!options.variants_root.empty()) {
      auto variants = variant_databases(options.variants_root, gold.db_id);
      if (!variants.empty()) v.ts = false;
    }
    return v;
  }

  sql::ExactMatchDetail em = sql::exact_match_detail(pred->sql, gold.gold_sql, schema);
  v.em = em.match;
  if (!em.pred_error.empty()) v.failure = em.pred_error;

  if (!options.db_root.empty()) {
    std::string failure;
    v.ex = execution_match(pred->sql, gold.gold_sql, database_path(options.db_root, gold.db_id),
                           &schema, options.timeout, &failure);
    if (v.failure.empty() && !*v.ex) v.failure = failure;
  }
  if (!options.variants_root.empty()) {
    auto variants = variant_databases(options.variants_root, gold.db_id);
    if (!variants.empty()) {
      std::string failure;
      v.ts = test_suite_match(pred->sql, gold.gold_sql, variants, &schema, options.timeout,
                              &failure);
      if (v.failure.empty() && !*v.ts) v.failure = failure;
    }
  }
  return v;
}

std::unordered_map<std::string, const PredictedSql*> index_predictions(
    const std::vector<PredictedSql>& preds, const std::vector<std::string>& known_ids) {
  std::unordered_set<std::string> known(known_ids.begin(), known_ids.end());
  std::unordered_map<std::string, const PredictedSql*> by_id;
  for (const auto& p : preds) {
    if (!known.count(p.source_id))
      throw AlignmentError("prediction for unknown source_id " + p.source_id);
    if (!by_id.emplace(p.source_id, &p).second)
      throw AlignmentError("duplicate prediction for source_id " + p.source_id);
  }
  return by_id;
}

void accumulate(BucketAgg& agg, const Verdict& v) {
  ++agg.count;
  ++agg.em.total;
  agg.em.correct += v.em ? 1 : 0;
  if (v.ex.has_value()) {
    ++agg.ex.total;
    agg.ex.correct += *v.ex ? 1 : 0;
  }
  if (v.ts.has_value()) {
    ++agg.ts.total;
    agg.ts.correct += *v.ts ? 1 : 0;
  }
}

}  // namespace

EvalReport aggregate_verdicts(std::vector<Verdict> verdicts) {
  EvalReport report;
  report.verdicts = std::move(verdicts);
  for (const auto& v : report.verdicts) {
    accumulate(report.all, v);
    accumulate(report.buckets[static_cast<std::size_t>(v.difficulty)], v);
    report.has_ex = report.has_ex || v.ex.has_value();
    report.has_ts = report.has_ts || v.ts.has_value();
  }
  return report;
}

EvalReport score_dataset(const std::vector<PredictedSql>& preds,
                         const std::vector<Example>& golds, const SchemaCatalog& catalog,
                         const ScoreOptions& options) {
  std::vector<std::string> ids;
  ids.reserve(golds.size());
  for (const auto& g : golds) ids.push_back(g.source_id);
  auto by_id = index_predictions(preds, ids);

  std::vector<Verdict> verdicts(golds.size());
  detail::parallel_for(golds.size(), options.jobs, [&](std::size_t i) {
    auto it = by_id.find(golds[i].source_id);
    verdicts[i] = score_one(golds[i], it == by_id.end() ? nullptr : it->second, catalog, options);
  });
  return aggregate_verdicts(std::move(verdicts));
}

InteractionReport score_interactions(const std::vector<PredictedSql>& preds,
                                     const std::vector<Interaction>& golds,
                                     const SchemaCatalog& catalog, const ScoreOptions& options) {
  std::vector<Example> turns;
  std::vector<std::size_t> interaction_of;
  for (std::size_t gi = 0; gi < golds.size(); ++gi) {
    const Interaction& inter = golds[gi];
    for (std::size_t t = 0; t < inter.turns.size(); ++t) {
      Example e;
      e.source_id = inter.source_id + "#" + std::to_string(t);
      e.db_id = inter.db_id;
      e.question = inter.turns[t].question;
      e.gold_sql = inter.turns[t].gold_sql;
      turns.push_back(std::move(e));
      interaction_of.push_back(gi);
    }
  }

  std::vector<std::string> ids;
  ids.reserve(turns.size());
  for (const auto& t : turns) ids.push_back(t.source_id);
  auto by_id = index_predictions(preds, ids);

  InteractionReport report;
  report.verdicts.resize(turns.size());
  detail::parallel_for(turns.size(), options.jobs, [&](std::size_t i) {
    auto it = by_id.find(turns[i].source_id);
    report.verdicts[i] =
        score_one(turns[i], it == by_id.end() ? nullptr : it->second, catalog, options);
  });

  bool all_ex = !report.verdicts.empty();
  bool all_ts = !report.verdicts.empty();
  for (const auto& v : report.verdicts) {
    all_ex = all_ex && v.ex.has_value();
    all_ts = all_ts && v.ts.has_value();
  }

  auto channel = [&](auto getter) {
    ChannelScores scores;
    std::vector<bool> interaction_ok(golds.size(), true);
    for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
      bool ok = getter(report.verdicts[i]);
      ++scores.qm.total;
      scores.qm.correct += ok ? 1 : 0;
      if (!ok) interaction_ok[interaction_of[i]] = false;
    }
    for (std::size_t gi = 0; gi < golds.size(); ++gi) {
      ++scores.im.total;
      scores.im.correct += interaction_ok[gi] ? 1 : 0;
    }
    return scores;
  };

  report.em = channel([](const Verdict& v) { return v.em; });
  if (all_ex) report.ex = channel([](const Verdict& v) { return *v.ex; });
  if (all_ts) report.ts = channel([](const Verdict& v) { return *v.ts; });
  return report;
}

namespace {

std::string fmt_pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  return buf;
}

void append_row(std::string& out, const std::string& label,
                const std::array<std::string, 6>& cells) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s%10s%10s%10s%10s%10s\n", label.c_str(), cells[1].c_str(),
                cells[2].c_str(), cells[3].c_str(), cells[4].c_str(), cells[5].c_str());
  out += buf;
}

}  // namespace

std::string render_report_table(const EvalReport& report) {
  std::string out;
  append_row(out, "", {"", "easy", "medium", "hard", "extra", "all"});
  std::array<std::string, 6> counts{"", "", "", "", "", ""};
  for (std::size_t b = 0; b < 4; ++b) counts[b + 1] = std::to_string(report.buckets[b].count);
  counts[5] = std::to_string(report.all.count);
  append_row(out, "count", counts);

  auto metric_row = [&](const char* label, auto pick) {
    std::array<std::string, 6> cells{"", "", "", "", "", ""};
    for (std::size_t b = 0; b < 4; ++b) cells[b + 1] = fmt_pct(pick(report.buckets[b]).percent());
    cells[5] = fmt_pct(pick(report.all).percent());
    append_row(out, label, cells);
  };
  metric_row("EM", [](const BucketAgg& a) -> const MetricAgg& { return a.em; });
  if (report.has_ex) metric_row("EX", [](const BucketAgg& a) -> const MetricAgg& { return a.ex; });
  if (report.has_ts) metric_row("TS", [](const BucketAgg& a) -> const MetricAgg& { return a.ts; });
  return out;
}

std::string render_interaction_table(const InteractionReport& report) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-8s%10s%10s\n", "", "QM", "IM");
  out += buf;
  auto row = [&](const char* label, const ChannelScores& s) {
    std::snprintf(buf, sizeof(buf), "%-8s%10s%10s\n", label, fmt_pct(s.qm.percent()).c_str(),
                  fmt_pct(s.im.percent()).c_str());
    out += buf;
  };
  row("EM", report.em);
  if (report.ex) row("EX", *report.ex);
  if (report.ts) row("TS", *report.ts);
  return out;
}

}  // namespace actsql
