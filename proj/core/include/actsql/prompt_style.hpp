#pragma once

#include <map>
#include <optional>
#include <string>

#include "actsql/content.hpp"
#include "actsql/schema.hpp"

namespace actsql {

// The five database prompt layouts. table_column lists each table on one
// line; table_column_pf appends primary/foreign key summary lines; the
// create_* styles emit CREATE TABLE blocks that differ in where key
// constraints appear (nowhere, end of column, end of table).
enum class DbStyle { table_column, table_column_pf, create_nopf, create_eoc, create_eot };

std::string db_style_name(DbStyle s);
std::optional<DbStyle> db_style_from(const std::string& name);

struct SchemaPrompt {
  DbStyle style = DbStyle::table_column;
  int content_rows = 0;
  std::string text;
};

// Renders one table's sampled rows as the comment block placed right after
// the table's schema lines: "/*", a "<k> example rows from table <t>:"
// caption, a tab-separated header, the rows, "**/".
std::string render_content_block(const ContentRows& rows);

// Renders a full database schema in the requested style. When `rows` is
// given, each listed table's content block follows that table's schema text;
// every key must name a table of the schema.
SchemaPrompt render_schema(const DatabaseSchema& db, DbStyle style,
                           const std::map<std::string, ContentRows>* rows = nullptr);

}  // namespace actsql
