#pragma once

#include <string>
#include <vector>

namespace actsql {

struct Example {
  std::string source_id;  // opaque, unique within a loaded set
  std::string db_id;
  std::string question;
  std::vector<std::string> question_tokens;
  std::string gold_sql;
};

struct Turn {
  std::string question;
  std::vector<std::string> question_tokens;
  std::string gold_sql;
};

struct Interaction {
  std::string source_id;
  std::string db_id;
  std::vector<Turn> turns;
};

// Lowercases, splits on whitespace, and detaches leading/trailing punctuation
// runs as separate tokens ("have?" -> "have", "?"). Internal punctuation is
// kept ("o'mahony"). Joining the tokens with single spaces gives the
// normalized question.
std::vector<std::string> tokenize_question(const std::string& question);
std::string normalize_question(const std::string& question);

// Same splitting with the original casing kept. Reasoning annotations quote
// question slices verbatim, so they are built from these tokens.
std::vector<std::string> tokenize_question_cased(const std::string& question);

// Loads a JSON array of {db_id, question, query} records. source_id is
// "q<index>" unless the record carries an explicit "id" string.
std::vector<Example> load_examples(const std::string& path);
std::vector<Example> parse_examples(const std::string& json_text, const std::string& origin);

// Loads a JSON array of {database_id, interaction: [{utterance, query}...]}
// records. Trailing turns without gold SQL (closing bookkeeping exchanges)
// are dropped; an interaction left with no turns is rejected.
std::vector<Interaction> load_interactions(const std::string& path);
std::vector<Interaction> parse_interactions(const std::string& json_text,
                                            const std::string& origin);

}  // namespace actsql
