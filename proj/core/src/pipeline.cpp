#include "actsql/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "actsql/text.hpp"
#include "parallel.hpp"

namespace actsql {

const char* const kSystemInstruction =
    "Given the database schema, you need to translate the question into the SQL query.";
const char* const kAnswerMarker = "So the final answer is:";
const char* const kRewriteInstruction =
    "Rewrite each question so it can be understood without the previous questions. Keep the "
    "meaning unchanged. Answer as a numbered list.";

const char* prompt_mode_name(PromptMode m) {
  switch (m) {
    case PromptMode::zero_shot: return "zero-shot";
    case PromptMode::few_shot: return "few-shot";
    case PromptMode::act_sql: return "act-sql";
  }
  return "?";
}

std::optional<PromptMode> prompt_mode_from(const std::string& name) {
  if (name == "zero-shot" || name == "zero_shot") return PromptMode::zero_shot;
  if (name == "few-shot" || name == "few_shot") return PromptMode::few_shot;
  if (name == "act-sql" || name == "act_sql" || name == "actsql") return PromptMode::act_sql;
  return std::nullopt;
}

const char* extraction_status_name(ExtractionStatus s) {
  switch (s) {
    case ExtractionStatus::marker: return "marker";
    case ExtractionStatus::fallback: return "fallback";
    case ExtractionStatus::failed: return "failed";
  }
  return "?";
}

namespace {

std::string user_turn(const std::string& schema_text, const std::string& question) {
  std::string out = "Database schema:\n";
  out += schema_text;
  out += "\nQuestion: ";
  out += question;
  return out;
}

std::string schema_text_for(const SchemaCatalog& catalog, const std::string& db_id,
                            const PipelineConfig& config, const RowsProvider& rows) {
  const DatabaseSchema& db = catalog.db(db_id);
  const std::map<std::string, ContentRows>* sampled = rows ? rows(db_id) : nullptr;
  return render_schema(db, config.style, sampled).text;
}

// Drops surrounding code fences, cuts at the first blank line, trims.
std::string clean_statement(const std::string& raw) {
  std::vector<std::string> lines = text::split_lines(text::trim(raw));
  while (!lines.empty() && text::trim(lines.front()).rfind("```", 0) == 0) lines.erase(lines.begin());
  while (!lines.empty() && text::trim(lines.back()).rfind("```", 0) == 0) lines.pop_back();
  std::vector<std::string> kept;
  for (const auto& line : lines) {
    if (!kept.empty() && text::trim(line).empty()) break;
    if (kept.empty() && text::trim(line).empty()) continue;
    kept.push_back(line);
  }
  return text::trim(text::join(kept, "\n"));
}

bool line_starts_select(const std::string& line) {
  return text::starts_with_ci(text::trim(line), "select");
}

// First line that looks like SQL, extended to the first blank line.
Extraction scan_for_select(const std::string& reply) {
  std::vector<std::string> lines = text::split_lines(reply);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!line_starts_select(lines[i])) continue;
    std::vector<std::string> taken;
    for (std::size_t j = i; j < lines.size(); ++j) {
      if (text::trim(lines[j]).empty()) break;
      taken.push_back(lines[j]);
    }
    std::string sql = clean_statement(text::join(taken, "\n"));
    if (!sql.empty()) return {sql, ExtractionStatus::fallback};
  }
  return {"", ExtractionStatus::failed};
}

}  // namespace

PromptBundle build_prompt(const DatabaseSchema& db, const std::string& question,
                          const std::vector<PreparedExemplar>& exemplars,
                          const ExemplarPool& pool, const SchemaCatalog& catalog,
                          const PipelineConfig& config, const RowsProvider& rows) {
  PromptBundle bundle;
  bundle.messages.push_back({Role::system, kSystemInstruction});
  for (const auto& ex : exemplars) {
    const Example& e = pool.examples().at(ex.pool_index);
    bundle.messages.push_back(
        {Role::user, user_turn(schema_text_for(catalog, e.db_id, config, rows), e.question)});
    bundle.messages.push_back({Role::assistant, ex.answer});
    bundle.exemplars.push_back(ex.pool_index);
  }
  const std::map<std::string, ContentRows>* sampled = rows ? rows(db.db_id) : nullptr;
  bundle.messages.push_back(
      {Role::user, user_turn(render_schema(db, config.style, sampled).text, question)});
  return bundle;
}

Extraction extract_sql(const std::string& reply, PromptMode mode) {
  if (mode == PromptMode::act_sql) {
    std::size_t pos = reply.rfind(kAnswerMarker);
    if (pos != std::string::npos) {
      std::string tail = reply.substr(pos + std::string(kAnswerMarker).size());
      std::string sql = clean_statement(tail);
      if (!sql.empty()) return {sql, ExtractionStatus::marker};
    }
    return scan_for_select(reply);
  }
  std::string body = clean_statement(reply);
  if (line_starts_select(body)) return {body, ExtractionStatus::fallback};
  return scan_for_select(reply);
}

namespace {

// Walks the static permutation then the dynamic ranking, preparing answers
// as it goes; candidates whose answer cannot be prepared are skipped, so
// replacements come from the same ordering.
std::vector<PreparedExemplar> prepare_exemplars(const Example& example, const ExemplarPool& pool,
                                                const SchemaCatalog& catalog,
                                                const PipelineConfig& config,
                                                const SimilarityProvider& sim) {
  std::vector<PreparedExemplar> prepared;
  if (config.mode == PromptMode::zero_shot) return prepared;
  if (config.selection.n_static < 0 || config.selection.n_dynamic < 0)
    throw ConfigInvariantError("exemplar counts must be non-negative");

  auto prepare = [&](std::size_t idx) -> std::optional<std::string> {
    const Example& e = pool.examples()[idx];
    if (config.mode == PromptMode::few_shot) return e.gold_sql;
    try {
      return annotate(e, catalog.db(e.db_id), sim, config.link).text;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  std::unordered_set<std::size_t> taken;
  auto take_from = [&](const std::vector<std::size_t>& order, int want) {
    int got = 0;
    for (std::size_t idx : order) {
      if (got == want) break;
      if (taken.count(idx)) continue;
      if (!example.source_id.empty() && pool.examples()[idx].source_id == example.source_id)
        continue;
      std::optional<std::string> answer = prepare(idx);
      if (!answer) continue;
      prepared.push_back({idx, std::move(*answer)});
      taken.insert(idx);
      ++got;
    }
    if (got < want)
      throw PoolTooSmallError("exemplar pool has too few usable entries: wanted " +
                              std::to_string(want) + " more, got " + std::to_string(got));
  };

  take_from(static_permutation(pool, config.selection.seed), config.selection.n_static);
  take_from(dynamic_ranking(pool, example.question, sim), config.selection.n_dynamic);
  return prepared;
}

}  // namespace

Prediction predict(const Example& example, const ExemplarPool& pool,
                   const SchemaCatalog& catalog, const PipelineConfig& config,
                   const RowsProvider& rows, const SimilarityProvider& sim,
                   LlmGateway& gateway, const GenerationParams& params) {
  std::vector<PreparedExemplar> exemplars =
      prepare_exemplars(example, pool, catalog, config, sim);
  PromptBundle bundle = build_prompt(catalog.db(example.db_id), example.question, exemplars,
                                     pool, catalog, config, rows);
  LlmReply reply = gateway.complete_chat(bundle.messages, params);
  Extraction ex = extract_sql(reply.content, config.mode);
  return {example.source_id, ex.sql, ex.status, reply.content};
}

std::vector<Prediction> predict_batch(const std::vector<Example>& examples,
                                      const ExemplarPool& pool, const SchemaCatalog& catalog,
                                      const PipelineConfig& config, const RowsProvider& rows,
                                      const SimilarityProvider& sim, LlmGateway& gateway,
                                      const GenerationParams& params, int jobs) {
  std::vector<Prediction> out(examples.size());
  detail::parallel_for(examples.size(), jobs, [&](std::size_t i) {
    out[i] = predict(examples[i], pool, catalog, config, rows, sim, gateway, params);
  });
  return out;
}

std::vector<RewriteExemplar> load_rewrite_exemplars(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open rewrite exemplars: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDocumentError("bad rewrite exemplar file " + path + ": " + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw MalformedDocumentError("rewrite exemplar file must be a non-empty array: " + path);
  std::vector<RewriteExemplar> out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("original") || !item.contains("rewritten"))
      throw MalformedDocumentError("rewrite exemplar needs original and rewritten lists");
    RewriteExemplar ex;
    for (const auto& q : item.at("original")) ex.original.push_back(q.get<std::string>());
    for (const auto& q : item.at("rewritten")) ex.rewritten.push_back(q.get<std::string>());
    if (ex.original.empty() || ex.original.size() != ex.rewritten.size())
      throw MalformedDocumentError("rewrite exemplar lists must be non-empty and same length");
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

std::string numbered_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += "\n";
    out += std::to_string(i + 1);
    out += ". ";
    out += items[i];
  }
  return out;
}

// Parses "1. text" / "2) text" lines in order; anything else is skipped.
std::vector<std::string> parse_numbered_list(const std::string& reply) {
  std::vector<std::string> out;
  for (const auto& raw : text::split_lines(reply)) {
    std::string line = text::trim(raw);
    std::size_t p = 0;
    while (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p]))) ++p;
    if (p == 0 || p >= line.size()) continue;
    if (line[p] != '.' && line[p] != ')') continue;
    std::string rest = text::trim(line.substr(p + 1));
    if (rest.empty()) continue;
    out.push_back(rest);
  }
  return out;
}

}  // namespace

RewriteOutcome rewrite_interaction(const Interaction& interaction,
                                   const std::vector<RewriteExemplar>& exemplars,
                                   LlmGateway& gateway, const GenerationParams& params,
                                   const std::string& instruction) {
  if (interaction.turns.empty())
    throw MalformedDocumentError("interaction " + interaction.source_id + " has no turns");

  std::vector<ChatMessage> messages;
  messages.push_back({Role::system, instruction});
  for (const auto& ex : exemplars) {
    messages.push_back({Role::user, numbered_list(ex.original)});
    messages.push_back({Role::assistant, numbered_list(ex.rewritten)});
  }
  std::vector<std::string> originals;
  originals.reserve(interaction.turns.size());
  for (const auto& t : interaction.turns) originals.push_back(t.question);
  messages.push_back({Role::user, numbered_list(originals)});

  LlmReply reply = gateway.complete_chat(messages, params);
  std::vector<std::string> rewritten = parse_numbered_list(reply.content);

  RewriteOutcome outcome;
  outcome.parse_failed = rewritten.empty();
  for (std::size_t i = 0; i < interaction.turns.size(); ++i) {
    std::string question;
    if (i < rewritten.size()) {
      question = rewritten[i];
    } else {
      question = originals[i];
      ++outcome.fallback_turns;
    }
    Example e;
    e.source_id = interaction.source_id + "#" + std::to_string(i);
    e.db_id = interaction.db_id;
    e.question = question;
    e.question_tokens = tokenize_question(question);
    e.gold_sql = interaction.turns[i].gold_sql;
    outcome.examples.push_back(std::move(e));
  }
  return outcome;
}

}  // namespace actsql
