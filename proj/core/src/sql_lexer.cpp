#include "actsql/sql/lexer.hpp"

#include <cctype>

#include "actsql/errors.hpp"

namespace actsql::sql {

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<Token> lex_sql(const std::string& sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      std::size_t start = i++;
      std::string content;
      bool closed = false;
      while (i < n) {
        if (sql[i] == quote) {
          if (i + 1 < n && sql[i + 1] == quote) {  // doubled quote escape
            content.push_back(quote);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        content.push_back(sql[i++]);
      }
      if (!closed) throw SqlSyntaxError("unterminated string literal", start);
      out.push_back(Token{TokKind::string, std::move(content), start});
      continue;
    }
    if (c == '`') {  // backtick-quoted identifier
      std::size_t start = i++;
      std::string content;
      while (i < n && sql[i] != '`') content.push_back(sql[i++]);
      if (i >= n) throw SqlSyntaxError("unterminated quoted identifier", start);
      ++i;
      out.push_back(Token{TokKind::identifier, std::move(content), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      std::size_t start = i;
      while (i < n && (std::isdigit(static_cast<unsigned char>(sql[i])) || sql[i] == '.')) ++i;
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
      }
      out.push_back(Token{TokKind::number, sql.substr(start, i - start), start});
      continue;
    }
    if (ident_start(c)) {
      std::size_t start = i;
      while (i < n && ident_char(sql[i])) ++i;
      out.push_back(Token{TokKind::identifier, sql.substr(start, i - start), start});
      continue;
    }
    // Punctuation, including two-character comparison operators.
    std::size_t start = i;
    if ((c == '!' || c == '<' || c == '>') && i + 1 < n &&
        (sql[i + 1] == '=' || (c == '<' && sql[i + 1] == '>'))) {
      out.push_back(Token{TokKind::punct, sql.substr(i, 2), start});
      i += 2;
      continue;
    }
    static const std::string singles = "(),.;*=<>+-/%";
    if (singles.find(c) == std::string::npos)
      throw SqlSyntaxError(std::string("unexpected character '") + c + "'", start);
    out.push_back(Token{TokKind::punct, std::string(1, c), start});
    ++i;
  }
  out.push_back(Token{TokKind::end, "", n});
  return out;
}

std::vector<LiteralSpan> literal_spans(const std::string& sql) {
  std::vector<LiteralSpan> out;
  for (const auto& tok : lex_sql(sql)) {
    if (tok.kind == TokKind::string) {
      // Span covers the quotes; re-derive the closing offset by scanning.
      std::size_t end = tok.pos + 1;
      char quote = sql[tok.pos];
      while (end < sql.size()) {
        if (sql[end] == quote) {
          if (end + 1 < sql.size() && sql[end + 1] == quote) {
            end += 2;
            continue;
          }
          ++end;
          break;
        }
        ++end;
      }
      out.push_back(LiteralSpan{tok.pos, end, true});
    } else if (tok.kind == TokKind::number) {
      out.push_back(LiteralSpan{tok.pos, tok.pos + tok.text.size(), false});
    }
  }
  return out;
}

}  // namespace actsql::sql
