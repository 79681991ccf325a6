#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "actsql/dataset.hpp"
#include "actsql/schema.hpp"
#include "actsql/sql/difficulty.hpp"

namespace actsql {

// A prediction as scored: only the id and the SQL text matter here.
struct PredictedSql {
  std::string source_id;
  std::string sql;
};

// Reads newline-delimited JSON records with at least {source_id, sql}.
std::vector<PredictedSql> load_predictions(const std::string& path);

struct Verdict {
  std::string source_id;
  sql::Difficulty difficulty = sql::Difficulty::easy;
  bool em = false;
  std::optional<bool> ex;  // set when a database was available
  std::optional<bool> ts;  // set when variant databases were available
  std::string failure;     // first scoring error for this example, if any
};

struct MetricAgg {
  int total = 0;
  int correct = 0;
  double percent() const { return total == 0 ? 0.0 : 100.0 * correct / total; }
};

struct BucketAgg {
  int count = 0;
  MetricAgg em, ex, ts;
};

struct EvalReport {
  std::vector<Verdict> verdicts;
  BucketAgg all;
  std::array<BucketAgg, 4> buckets;  // indexed by sql::Difficulty
  bool has_ex = false;
  bool has_ts = false;
};

struct ScoreOptions {
  std::string db_root;        // empty disables execution accuracy
  std::string variants_root;  // empty disables test-suite accuracy
  std::chrono::milliseconds timeout{10000};
  int jobs = 1;
};

// Compares result sets of the two queries on one database. Rows compare as a
// multiset unless the gold query orders its output. Returns false (never
// throws) for prediction-side failures; gold-side failures throw.
bool execution_match(const std::string& pred, const std::string& gold,
                     const std::string& db_path, const DatabaseSchema* schema,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(10000),
                     std::string* failure = nullptr);

// execution_match over every variant database; true iff all match.
bool test_suite_match(const std::string& pred, const std::string& gold,
                      const std::vector<std::string>& variant_db_paths,
                      const DatabaseSchema* schema,
                      std::chrono::milliseconds timeout = std::chrono::milliseconds(10000),
                      std::string* failure = nullptr);

// Variant databases for one db id: <variants_root>/<db_id>/*.sqlite, sorted.
std::vector<std::string> variant_databases(const std::string& variants_root,
                                           const std::string& db_id);

// Scores a prediction file against gold examples. Predictions align by
// source_id; a duplicated or unknown id is an alignment error, a missing
// prediction scores false on every metric.
EvalReport score_dataset(const std::vector<PredictedSql>& preds,
                         const std::vector<Example>& golds, const SchemaCatalog& catalog,
                         const ScoreOptions& options = {});

// Question-level and interaction-level accuracy for one verdict channel.
struct ChannelScores {
  MetricAgg qm;  // over all turns
  MetricAgg im;  // over interactions whose every turn is correct
};

struct InteractionReport {
  std::vector<Verdict> verdicts;  // one per turn, ids "<interaction>#<turn>"
  ChannelScores em;
  std::optional<ChannelScores> ex;
  std::optional<ChannelScores> ts;
};

// Scores multi-turn predictions whose ids are "<interaction>#<turn>".
InteractionReport score_interactions(const std::vector<PredictedSql>& preds,
                                     const std::vector<Interaction>& golds,
                                     const SchemaCatalog& catalog,
                                     const ScoreOptions& options = {});

// Folds a verdict list into bucketed aggregates.
EvalReport aggregate_verdicts(std::vector<Verdict> verdicts);

// Plain-text summary: difficulty columns, count plus one row per metric,
// percentages with one decimal.
std::string render_report_table(const EvalReport& report);
std::string render_interaction_table(const InteractionReport& report);

}  // namespace actsql
