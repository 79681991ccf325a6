#include "actsql/dataset.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "actsql/text.hpp"

namespace actsql {

using nlohmann::json;

namespace {

bool is_detachable(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

void tokenize_word(const std::string& word, std::vector<std::string>& out) {
  std::size_t b = 0, e = word.size();
  std::vector<std::string> lead, tail;
  while (b < e && is_detachable(word[b])) lead.emplace_back(1, word[b++]);
  while (e > b && is_detachable(word[e - 1])) tail.emplace_back(1, word[--e]);
  for (auto& t : lead) out.push_back(std::move(t));
  if (e > b) out.push_back(word.substr(b, e - b));
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) out.push_back(std::move(*it));
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_array(const std::string& json_text, const std::string& origin) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw MalformedDocumentError(origin + ": invalid JSON");
  if (!doc.is_array()) throw MalformedDocumentError(origin + ": top level is not an array");
  return doc;
}

std::string require_string(const json& obj, const char* field, const std::string& where) {
  if (!obj.contains(field) || !obj[field].is_string())
    throw MalformedDocumentError(where + ": missing string field '" + field + "'");
  return obj[field].get<std::string>();
}

}  // namespace

std::vector<std::string> tokenize_question(const std::string& question) {
  std::vector<std::string> out;
  for (const auto& word : text::split_whitespace(text::to_lower(question)))
    tokenize_word(word, out);
  return out;
}

std::vector<std::string> tokenize_question_cased(const std::string& question) {
  std::vector<std::string> out;
  for (const auto& word : text::split_whitespace(question)) tokenize_word(word, out);
  return out;
}

std::string normalize_question(const std::string& question) {
  return text::join(tokenize_question(question), " ");
}

std::vector<Example> parse_examples(const std::string& json_text, const std::string& origin) {
  json doc = parse_array(json_text, origin);
  std::vector<Example> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    const std::string where = origin + " record " + std::to_string(i);
    if (!rec.is_object()) throw MalformedDocumentError(where + ": not an object");
    Example ex;
    ex.db_id = require_string(rec, "db_id", where);
    ex.question = require_string(rec, "question", where);
    ex.gold_sql = require_string(rec, "query", where);
    ex.source_id = rec.contains("id") && rec["id"].is_string() ? rec["id"].get<std::string>()
                                                               : "q" + std::to_string(i);
    ex.question_tokens = tokenize_question(ex.question);
    if (ex.question_tokens.empty())
      throw MalformedDocumentError(where + ": question has no tokens");
    if (text::trim(ex.gold_sql).empty())
      throw MalformedDocumentError(where + ": empty gold SQL");
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> load_examples(const std::string& path) {
  return parse_examples(read_file(path, "example file"), path);
}

std::vector<Interaction> parse_interactions(const std::string& json_text,
                                            const std::string& origin) {
  json doc = parse_array(json_text, origin);
  std::vector<Interaction> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    const std::string where = origin + " record " + std::to_string(i);
    if (!rec.is_object()) throw MalformedDocumentError(where + ": not an object");
    Interaction it;
    it.db_id = require_string(rec, "database_id", where);
    it.source_id = rec.contains("id") && rec["id"].is_string() ? rec["id"].get<std::string>()
                                                               : "i" + std::to_string(i);
    if (!rec.contains("interaction") || !rec["interaction"].is_array())
      throw MalformedDocumentError(where + ": missing interaction array");
    std::vector<Turn> turns;
    for (const auto& t : rec["interaction"]) {
      if (!t.is_object()) throw MalformedDocumentError(where + ": turn is not an object");
      Turn turn;
      turn.question = require_string(t, "utterance", where);
      turn.gold_sql =
          t.contains("query") && t["query"].is_string() ? t["query"].get<std::string>() : "";
      turn.question_tokens = tokenize_question(turn.question);
      if (turn.question_tokens.empty())
        throw MalformedDocumentError(where + ": turn question has no tokens");
      turns.push_back(std::move(turn));
    }
    while (!turns.empty() && text::trim(turns.back().gold_sql).empty()) turns.pop_back();
    if (turns.empty())
      throw MalformedDocumentError(where + ": interaction has no turns with gold SQL");
    for (const auto& t : turns)
      if (text::trim(t.gold_sql).empty())
        throw MalformedDocumentError(where + ": turn without gold SQL before the last turn");
    it.turns = std::move(turns);
    out.push_back(std::move(it));
  }
  return out;
}

std::vector<Interaction> load_interactions(const std::string& path) {
  return parse_interactions(read_file(path, "interaction file"), path);
}

}  // namespace actsql
