#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actsql/auto_cot.hpp"
#include "actsql/dataset.hpp"
#include "actsql/exemplar.hpp"
#include "actsql/llm.hpp"
#include "actsql/prompt_style.hpp"
#include "actsql/schema.hpp"

namespace actsql {

enum class PromptMode { zero_shot, few_shot, act_sql };
std::optional<PromptMode> prompt_mode_from(const std::string& name);
const char* prompt_mode_name(PromptMode m);

// The fixed system instruction of every text-to-SQL prompt.
extern const char* const kSystemInstruction;
// The marker line introducing the final SQL of a reasoning answer.
extern const char* const kAnswerMarker;
// Default instruction for the question rewriting prompt.
extern const char* const kRewriteInstruction;

struct PipelineConfig {
  PromptMode mode = PromptMode::act_sql;
  DbStyle style = DbStyle::create_eot;
  int content_rows = 3;
  SelectionConfig selection;  // n_static/n_dynamic/seed
  LinkOptions link;           // slice bound for reasoning annotations
};

// Supplies sampled content rows per database; return nullptr to render a
// schema without content blocks. The returned map must stay alive for the
// duration of the call that received it.
using RowsProvider =
    std::function<const std::map<std::string, ContentRows>*(const std::string& db_id)>;

struct PromptBundle {
  std::vector<ChatMessage> messages;  // system, exemplar pairs, final user turn
  std::vector<std::size_t> exemplars; // pool indices actually used, in order
};

// One exemplar as it appears in the prompt: its schema text plus the
// assistant answer (raw gold SQL in few_shot, reasoning text in act_sql).
struct PreparedExemplar {
  std::size_t pool_index = 0;
  std::string answer;
};

// Assembles the chat prompt for one question over `db`. Exemplars come with
// their answers already prepared; message count is 2 * exemplars + 2.
PromptBundle build_prompt(const DatabaseSchema& db, const std::string& question,
                          const std::vector<PreparedExemplar>& exemplars,
                          const ExemplarPool& pool, const SchemaCatalog& catalog,
                          const PipelineConfig& config, const RowsProvider& rows);

enum class ExtractionStatus { marker, fallback, failed };
const char* extraction_status_name(ExtractionStatus s);

struct Extraction {
  std::string sql;
  ExtractionStatus status = ExtractionStatus::failed;
};

// Pulls the SQL out of a model reply. Reasoning replies are cut after the
// last answer marker; otherwise the first SELECT-looking line is taken. Code
// fences are stripped, the statement ends at the first blank line.
Extraction extract_sql(const std::string& reply, PromptMode mode);

struct Prediction {
  std::string source_id;
  std::string sql;
  ExtractionStatus status = ExtractionStatus::failed;
  std::string raw_reply;  // unmodified model output, kept for audit
};

// Predicts SQL for one example: select exemplars, prepare their answers
// (annotating gold SQL in act_sql mode; exemplars whose gold cannot be
// annotated are replaced by the next-ranked candidate), build the prompt,
// make exactly one gateway call, extract.
Prediction predict(const Example& example, const ExemplarPool& pool,
                   const SchemaCatalog& catalog, const PipelineConfig& config,
                   const RowsProvider& rows, const SimilarityProvider& sim,
                   LlmGateway& gateway, const GenerationParams& params);

// Batch variant fanning out over `jobs` threads; result order matches input.
std::vector<Prediction> predict_batch(const std::vector<Example>& examples,
                                      const ExemplarPool& pool, const SchemaCatalog& catalog,
                                      const PipelineConfig& config, const RowsProvider& rows,
                                      const SimilarityProvider& sim, LlmGateway& gateway,
                                      const GenerationParams& params, int jobs = 1);

struct RewriteExemplar {
  std::vector<std::string> original;
  std::vector<std::string> rewritten;
};

// Loads labeled rewriting pairs: a JSON array of {original: [...],
// rewritten: [...]} with matching lengths. At least one pair is required.
std::vector<RewriteExemplar> load_rewrite_exemplars(const std::string& path);

struct RewriteOutcome {
  std::vector<Example> examples;  // one per turn, source_id "<interaction>#<turn>"
  int fallback_turns = 0;         // turns that kept their original question
  bool parse_failed = false;      // reply had no numbered list at all
};

// Rewrites every turn of an interaction into a self-contained question with
// one gateway call. The reply is parsed as a numbered list; missing tail
// entries fall back to the original questions and are counted.
RewriteOutcome rewrite_interaction(const Interaction& interaction,
                                   const std::vector<RewriteExemplar>& exemplars,
                                   LlmGateway& gateway, const GenerationParams& params,
                                   const std::string& instruction = kRewriteInstruction);

}  // namespace actsql
