#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "actsql/auto_cot.hpp"
#include "actsql/content.hpp"
#include "actsql/dataset.hpp"
#include "actsql/errors.hpp"
#include "actsql/eval.hpp"
#include "actsql/exemplar.hpp"
#include "actsql/llm.hpp"
#include "actsql/pipeline.hpp"
#include "actsql/prompt_style.hpp"
#include "actsql/schema.hpp"
#include "actsql/similarity.hpp"
#include "actsql/text.hpp"
#include "actsql/version.hpp"

namespace {

using json = nlohmann::json;
using namespace actsql;

// Flag-level misuse that CLI11 cannot catch on its own; exits with code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

std::unique_ptr<SimilarityProvider> make_similarity(const std::string& spec) {
  if (spec == "lexical") return std::make_unique<LexicalTrigramSimilarity>();
  const std::string prefix = "embedding:";
  if (spec.rfind(prefix, 0) == 0) {
    std::string url = spec.substr(prefix.size());
    if (url.empty()) throw UsageError("--sim embedding:<url> needs a URL");
    return std::make_unique<HttpEmbeddingSimilarity>(url, "text-embedding-3-small",
                                                     env_or("ACTSQL_API_KEY", ""));
  }
  throw UsageError("unknown --sim '" + spec + "' (use lexical or embedding:<url>)");
}

DbStyle parse_style(const std::string& name) {
  auto style = db_style_from(name);
  if (!style) throw UsageError("unknown --style '" + name + "'");
  return *style;
}

CacheMode parse_cache_mode(const std::string& name) {
  auto mode = cache_mode_from(name);
  if (!mode) throw UsageError("unknown --cache-mode '" + name + "'");
  return *mode;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// Caches sampled content rows per database so prompts for the same db reuse
// one read. Thread-safe; predict workers share it.
class ContentCache {
 public:
  ContentCache(std::string db_root, int rows) : db_root_(std::move(db_root)), rows_(rows) {}

  const std::map<std::string, ContentRows>* get(const SchemaCatalog& catalog,
                                                const std::string& db_id) {
    if (rows_ <= 0) return nullptr;
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(db_id);
    if (it == cache_.end()) {
      auto sampled =
          sample_all_tables(database_path(db_root_, db_id), catalog.db(db_id), rows_);
      it = cache_.emplace(db_id, std::move(sampled)).first;
    }
    return &it->second;
  }

 private:
  std::string db_root_;
  int rows_ = 0;
  std::mutex mu_;
  std::map<std::string, std::map<std::string, ContentRows>> cache_;
};

struct GatewayFlags {
  std::string cache_path;
  std::string cache_mode = "live";
  std::string api_base;
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  int max_inflight = 4;
};

void add_gateway_flags(CLI::App* cmd, GatewayFlags& flags) {
  cmd->add_option("--cache", flags.cache_path, "reply cache file (JSON lines)");
  cmd->add_option("--cache-mode", flags.cache_mode, "live | record | replay-strict")
      ->default_str("live");
  cmd->add_option("--api-base", flags.api_base,
                  "chat completions base URL (default $ACTSQL_API_BASE)");
  cmd->add_option("--api-key", flags.api_key, "API key (default $ACTSQL_API_KEY)");
  cmd->add_option("--model", flags.model, "model name")->default_str("gpt-3.5-turbo");
}

std::unique_ptr<LlmGateway> make_gateway(const GatewayFlags& flags) {
  CacheMode mode = parse_cache_mode(flags.cache_mode);
  if (mode != CacheMode::live && flags.cache_path.empty())
    throw UsageError("--cache-mode " + flags.cache_mode + " needs --cache");
  std::string base = flags.api_base.empty() ? env_or("ACTSQL_API_BASE", "") : flags.api_base;
  std::string key = flags.api_key.empty() ? env_or("ACTSQL_API_KEY", "") : flags.api_key;
  if (base.empty() && mode != CacheMode::replay_strict)
    throw UsageError("no API base: set --api-base or ACTSQL_API_BASE");
  auto backend = std::make_shared<HttpChatBackend>(base, key);
  LlmGateway::Options options;
  options.max_inflight = flags.max_inflight;
  return std::make_unique<LlmGateway>(backend, mode, flags.cache_path, options);
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + suffix;
}

void write_manifest(const std::string& path, const json& manifest) {
  auto out = open_out(path);
  out << manifest.dump(2) << "\n";
}

json verdict_to_json(const Verdict& v) {
  json rec{{"source_id", v.source_id},
           {"difficulty", sql::difficulty_name(v.difficulty)},
           {"em", v.em}};
  if (v.ex) rec["ex"] = *v.ex;
  if (v.ts) rec["ts"] = *v.ts;
  if (!v.failure.empty()) rec["failure"] = v.failure;
  return rec;
}

json bucket_to_json(const BucketAgg& b, bool has_ex, bool has_ts) {
  json rec{{"count", b.count}, {"em", b.em.percent()}};
  if (has_ex) rec["ex"] = b.ex.percent();
  if (has_ts) rec["ts"] = b.ts.percent();
  return rec;
}

// ---------------------------------------------------------------- render --

struct RenderArgs {
  std::string tables, db_root, db_id;
  std::string style = "create-eot";
  int rows = 0;
};

int cmd_render(const RenderArgs& args) {
  DbStyle style = parse_style(args.style);
  if (args.rows < 0) throw UsageError("--rows must be >= 0");
  if (args.rows > 0 && args.db_root.empty()) throw UsageError("--rows needs --db-root");
  SchemaCatalog catalog = load_schema_catalog(args.tables);
  const DatabaseSchema& db = catalog.db(args.db_id);
  if (args.rows > 0) {
    auto sampled = sample_all_tables(database_path(args.db_root, args.db_id), db, args.rows);
    std::cout << render_schema(db, style, &sampled).text << "\n";
  } else {
    std::cout << render_schema(db, style).text << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- annotate --

struct AnnotateArgs {
  std::string tables, train, out;
  std::string sim = "lexical";
  int max_len = 8;
};

int cmd_annotate(const AnnotateArgs& args) {
  SchemaCatalog catalog = load_schema_catalog(args.tables);
  std::vector<Example> examples = load_examples(args.train);
  auto sim = make_similarity(args.sim);
  LinkOptions link;
  link.max_len = args.max_len;

  auto out = open_out(args.out);
  int written = 0, skipped = 0;
  for (const auto& e : examples) {
    try {
      CotAnnotation ann = annotate(e, catalog.db(e.db_id), *sim, link);
      json rec{{"source_id", e.source_id},
               {"db_id", e.db_id},
               {"question", e.question},
               {"cot", ann.text},
               {"final_sql", ann.final_sql}};
      out << rec.dump() << "\n";
      ++written;
    } catch (const Error&) {
      ++skipped;
    }
  }
  std::cout << "annotated " << written << " of " << examples.size() << " examples, skipped "
            << skipped << "\n";
  return written == 0 ? 1 : 0;
}

// --------------------------------------------------------------- predict --

struct PredictArgs {
  std::string tables, db_root, train, test, out;
  std::string mode = "act-sql";
  std::string style = "create-eot";
  std::string sim = "lexical";
  int rows = 3;
  int ns = 2, nd = 2;
  std::uint64_t seed = 0;
  int max_len = 8;
  int max_tokens = 0;  // 0 = pick by mode
  int jobs = 1;
  GatewayFlags gateway;
  bool ns_set = false, nd_set = false;
};

int cmd_predict(const PredictArgs& args) {
  PipelineConfig config;
  auto mode = prompt_mode_from(args.mode);
  if (!mode) throw UsageError("unknown --mode '" + args.mode + "'");
  config.mode = *mode;
  config.style = parse_style(args.style);
  if (args.rows < 0) throw UsageError("--rows must be >= 0");
  if (args.rows > 0 && args.db_root.empty()) throw UsageError("--rows needs --db-root");
  config.content_rows = args.rows;
  config.selection.n_static = args.ns;
  config.selection.n_dynamic = args.nd;
  config.selection.seed = args.seed;
  config.link.max_len = args.max_len;
  if (config.mode == PromptMode::zero_shot) {
    if ((args.ns_set && args.ns != 0) || (args.nd_set && args.nd != 0))
      std::cerr << "warning: zero-shot ignores --ns/--nd\n";
    config.selection.n_static = 0;
    config.selection.n_dynamic = 0;
  }

  if (config.mode != PromptMode::zero_shot && args.train.empty())
    throw UsageError("--mode " + args.mode + " needs --train");

  SchemaCatalog catalog = load_schema_catalog(args.tables);
  std::vector<Example> test = load_examples(args.test);
  auto sim = make_similarity(args.sim);

  ExemplarPool pool;
  if (!args.train.empty()) pool = ExemplarPool(load_examples(args.train), *sim);

  GenerationParams params;
  params.model = args.gateway.model;
  params.max_tokens = args.max_tokens > 0
                          ? args.max_tokens
                          : (config.mode == PromptMode::act_sql ? 750 : 150);

  auto gateway = make_gateway(args.gateway);

  json manifest{{"tool_version", ACTSQL_VERSION},
                {"command", "predict"},
                {"mode", prompt_mode_name(config.mode)},
                {"style", db_style_name(config.style)},
                {"content_rows", config.content_rows},
                {"n_static", config.selection.n_static},
                {"n_dynamic", config.selection.n_dynamic},
                {"seed", config.selection.seed},
                {"max_slice_len", config.link.max_len},
                {"model", params.model},
                {"temperature", params.temperature},
                {"max_tokens", params.max_tokens},
                {"cache_mode", cache_mode_name(gateway->mode())},
                {"cache", args.gateway.cache_path},
                {"similarity", args.sim},
                {"tables", args.tables},
                {"db_root", args.db_root},
                {"train", args.train},
                {"test", args.test},
                {"out", args.out},
                {"jobs", args.jobs},
                {"pool_hash", pool.size() ? pool.content_hash() : ""},
                {"pool_size", pool.size()}};
  write_manifest(sibling_path(args.out, ".manifest.json"), manifest);

  ContentCache content(args.db_root, args.rows);
  RowsProvider rows = [&](const std::string& db_id) { return content.get(catalog, db_id); };

  std::vector<Prediction> preds =
      predict_batch(test, pool, catalog, config, rows, *sim, *gateway, params, args.jobs);

  auto out = open_out(args.out);
  auto sql_out = open_out(sibling_path(args.out, ".sql"));
  int failed = 0;
  for (const auto& p : preds) {
    json rec{{"source_id", p.source_id},
             {"sql", p.sql},
             {"extraction_status", extraction_status_name(p.status)},
             {"raw_reply", p.raw_reply}};
    out << rec.dump() << "\n";
    sql_out << text::collapse_whitespace(p.sql) << "\n";
    if (p.status == ExtractionStatus::failed) ++failed;
  }
  std::cout << "predicted " << preds.size() << " examples, extraction failures " << failed
            << "\n";
  return 0;
}

// ------------------------------------------------------------------ eval --

struct EvalArgs {
  std::string pred, gold, tables, db_root, variants_root, out;
  bool multiturn = false;
  double timeout_s = 10.0;
  int jobs = 1;
};

int cmd_eval(const EvalArgs& args) {
  SchemaCatalog catalog = load_schema_catalog(args.tables);
  std::vector<PredictedSql> preds = load_predictions(args.pred);
  ScoreOptions options;
  options.db_root = args.db_root;
  options.variants_root = args.variants_root;
  options.timeout = std::chrono::milliseconds(static_cast<long>(args.timeout_s * 1000));
  options.jobs = args.jobs;

  json doc{{"tool_version", ACTSQL_VERSION}};
  if (args.multiturn) {
    std::vector<Interaction> golds = load_interactions(args.gold);
    InteractionReport report = score_interactions(preds, golds, catalog, options);
    EvalReport flat = aggregate_verdicts(report.verdicts);
    std::cout << render_report_table(flat) << "\n" << render_interaction_table(report);
    for (const auto& v : flat.verdicts) doc["verdicts"].push_back(verdict_to_json(v));
    doc["aggregates"] = {{"all", bucket_to_json(flat.all, flat.has_ex, flat.has_ts)}};
    auto channel = [](const ChannelScores& s) {
      return json{{"qm", s.qm.percent()}, {"im", s.im.percent()}};
    };
    doc["multiturn"] = {{"em", channel(report.em)}};
    if (report.ex) doc["multiturn"]["ex"] = channel(*report.ex);
    if (report.ts) doc["multiturn"]["ts"] = channel(*report.ts);
  } else {
    std::vector<Example> golds = load_examples(args.gold);
    EvalReport report = score_dataset(preds, golds, catalog, options);
    std::cout << render_report_table(report);
    for (const auto& v : report.verdicts) doc["verdicts"].push_back(verdict_to_json(v));
    const char* names[4] = {"easy", "medium", "hard", "extra"};
    json buckets;
    for (int b = 0; b < 4; ++b)
      buckets[names[b]] = bucket_to_json(report.buckets[b], report.has_ex, report.has_ts);
    buckets["all"] = bucket_to_json(report.all, report.has_ex, report.has_ts);
    doc["aggregates"] = buckets;
  }
  if (!args.out.empty()) {
    auto out = open_out(args.out);
    out << doc.dump(2) << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- rewrite --

struct RewriteArgs {
  std::string tables, interactions, exemplars, out;
  std::string instruction;
  int max_tokens = 750;
  int jobs = 1;
  GatewayFlags gateway;
};

int cmd_rewrite(const RewriteArgs& args) {
  {
    std::ifstream probe(args.exemplars);
    if (!probe) throw Error("cannot open rewrite exemplars: " + args.exemplars);
    json doc;
    try {
      probe >> doc;
    } catch (const json::exception&) {
      doc = json::array();
    }
    if (!doc.is_array() || doc.empty())
      throw UsageError("rewrite exemplar file has no pairs: " + args.exemplars);
  }
  SchemaCatalog catalog = load_schema_catalog(args.tables);
  std::vector<Interaction> interactions = load_interactions(args.interactions);
  for (const auto& inter : interactions) catalog.db(inter.db_id);
  std::vector<RewriteExemplar> exemplars = load_rewrite_exemplars(args.exemplars);

  GenerationParams params = GenerationParams::reasoning(args.gateway.model);
  params.max_tokens = args.max_tokens;
  auto gateway = make_gateway(args.gateway);

  json manifest{{"tool_version", ACTSQL_VERSION},
                {"command", "rewrite"},
                {"model", params.model},
                {"temperature", params.temperature},
                {"max_tokens", params.max_tokens},
                {"cache_mode", cache_mode_name(gateway->mode())},
                {"cache", args.gateway.cache_path},
                {"tables", args.tables},
                {"interactions", args.interactions},
                {"exemplars", args.exemplars},
                {"out", args.out},
                {"jobs", args.jobs}};
  write_manifest(sibling_path(args.out, ".manifest.json"), manifest);

  std::string instruction = args.instruction.empty() ? kRewriteInstruction : args.instruction;
  std::vector<RewriteOutcome> outcomes(interactions.size());
  {
    std::atomic<std::size_t> next{0};
    int workers = std::max(1, std::min<int>(args.jobs, static_cast<int>(interactions.size())));
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= interactions.size()) return;
          try {
            outcomes[i] =
                rewrite_interaction(interactions[i], exemplars, *gateway, params, instruction);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  auto out = open_out(args.out);
  int questions = 0, fallback = 0, parse_failures = 0;
  for (const auto& o : outcomes) {
    for (const auto& e : o.examples) {
      json rec{{"source_id", e.source_id},
               {"db_id", e.db_id},
               {"question", e.question},
               {"gold_sql", e.gold_sql}};
      out << rec.dump() << "\n";
      ++questions;
    }
    fallback += o.fallback_turns;
    parse_failures += o.parse_failed ? 1 : 0;
  }
  std::cout << "rewrote " << interactions.size() << " interactions into " << questions
            << " questions, fallback turns " << fallback << ", parse failures "
            << parse_failures << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"text-to-SQL prompting toolkit"};
  app.set_version_flag("--version", ACTSQL_VERSION);
  app.require_subcommand(1);

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "print a database schema prompt");
  render->add_option("--tables", render_args.tables, "schema catalog JSON")->required();
  render->add_option("--db-id", render_args.db_id, "database id")->required();
  render->add_option("--style", render_args.style, "schema style")->default_str("create-eot");
  render->add_option("--rows", render_args.rows, "content rows per table")->default_str("0");
  render->add_option("--db-root", render_args.db_root, "database directory root");

  AnnotateArgs annotate_args;
  auto* annotate = app.add_subcommand("annotate", "generate reasoning annotations");
  annotate->add_option("--tables", annotate_args.tables, "schema catalog JSON")->required();
  annotate->add_option("--train", annotate_args.train, "examples JSON")->required();
  annotate->add_option("--out", annotate_args.out, "output JSON lines")->required();
  annotate->add_option("--sim", annotate_args.sim, "lexical | embedding:<url>")
      ->default_str("lexical");
  annotate->add_option("--max-len", annotate_args.max_len, "longest question slice")
      ->default_str("8");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "predict SQL for a test set");
  predict->add_option("--tables", predict_args.tables, "schema catalog JSON")->required();
  predict->add_option("--test", predict_args.test, "test examples JSON")->required();
  predict->add_option("--train", predict_args.train, "exemplar pool JSON");
  predict->add_option("--out", predict_args.out, "predictions output (JSON lines)")->required();
  predict->add_option("--mode", predict_args.mode, "zero-shot | few-shot | act-sql")
      ->default_str("act-sql");
  predict->add_option("--style", predict_args.style, "schema style")->default_str("create-eot");
  predict->add_option("--rows", predict_args.rows, "content rows per table")->default_str("3");
  predict->add_option("--db-root", predict_args.db_root, "database directory root");
  auto* ns_opt = predict->add_option("--ns", predict_args.ns, "static exemplars");
  auto* nd_opt = predict->add_option("--nd", predict_args.nd, "dynamic exemplars");
  predict->add_option("--seed", predict_args.seed, "static selection seed")->default_str("0");
  predict->add_option("--max-len", predict_args.max_len, "longest question slice")
      ->default_str("8");
  predict->add_option("--max-tokens", predict_args.max_tokens,
                      "completion budget (default 750 reasoning, 150 plain)");
  predict->add_option("--sim", predict_args.sim, "lexical | embedding:<url>")
      ->default_str("lexical");
  predict->add_option("--jobs", predict_args.jobs, "parallel workers")->default_str("1");
  add_gateway_flags(predict, predict_args.gateway);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--pred", eval_args.pred, "predictions JSON lines")->required();
  eval->add_option("--gold", eval_args.gold, "gold examples or interactions JSON")->required();
  eval->add_option("--tables", eval_args.tables, "schema catalog JSON")->required();
  eval->add_option("--db-root", eval_args.db_root, "database root (enables execution checks)");
  eval->add_option("--variants-root", eval_args.variants_root,
                   "variant database root (enables test-suite checks)");
  eval->add_flag("--multiturn", eval_args.multiturn, "gold file holds interactions");
  eval->add_option("--timeout", eval_args.timeout_s, "per-query seconds")->default_str("10");
  eval->add_option("--jobs", eval_args.jobs, "parallel workers")->default_str("1");
  eval->add_option("--out", eval_args.out, "write the full report JSON here");

  RewriteArgs rewrite_args;
  auto* rewrite = app.add_subcommand("rewrite", "rewrite multi-turn questions");
  rewrite->add_option("--tables", rewrite_args.tables, "schema catalog JSON")->required();
  rewrite->add_option("--interactions", rewrite_args.interactions, "interactions JSON")
      ->required();
  rewrite->add_option("--exemplars", rewrite_args.exemplars, "labeled rewrite pairs JSON")
      ->required();
  rewrite->add_option("--out", rewrite_args.out, "output examples (JSON lines)")->required();
  rewrite->add_option("--instruction", rewrite_args.instruction, "override the instruction");
  rewrite->add_option("--max-tokens", rewrite_args.max_tokens, "completion budget")
      ->default_str("750");
  rewrite->add_option("--jobs", rewrite_args.jobs, "parallel workers")->default_str("1");
  add_gateway_flags(rewrite, rewrite_args.gateway);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  predict_args.ns_set = ns_opt->count() > 0;
  predict_args.nd_set = nd_opt->count() > 0;

  try {
    if (render->parsed()) return cmd_render(render_args);
    if (annotate->parsed()) return cmd_annotate(annotate_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (rewrite->parsed()) return cmd_rewrite(rewrite_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
