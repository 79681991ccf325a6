#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace actsql::sql {

enum class TokKind { identifier, number, string, punct, end };

struct Token {
  TokKind kind = TokKind::end;
  std::string text;    // identifier/number lexeme, unquoted string content, or punctuation
  std::size_t pos = 0; // byte offset in the input
};

// Splits SQL text into identifiers, numeric literals, quoted strings and
// punctuation. Single- and double-quoted runs both become string tokens
// (doubled quotes escape). Keywords stay plain identifiers; the parser
// matches them case-insensitively.
std::vector<Token> lex_sql(const std::string& sql);

// Byte ranges of every literal token (strings and numbers) in the text;
// used for literal fuzzing.
struct LiteralSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past
  bool is_string = false;
};
std::vector<LiteralSpan> literal_spans(const std::string& sql);

}  // namespace actsql::sql
