#include "actsql/prompt_style.hpp"

#include "actsql/errors.hpp"
#include "actsql/text.hpp"

namespace actsql {

std::string db_style_name(DbStyle s) {
  switch (s) {
    case DbStyle::table_column: return "table-column";
    case DbStyle::table_column_pf: return "table-column-pf";
    case DbStyle::create_nopf: return "create-nopf";
    case DbStyle::create_eoc: return "create-eoc";
    case DbStyle::create_eot: return "create-eot";
  }
  return "table-column";
}

std::optional<DbStyle> db_style_from(const std::string& name) {
  if (name == "table-column") return DbStyle::table_column;
  if (name == "table-column-pf") return DbStyle::table_column_pf;
  if (name == "create-nopf") return DbStyle::create_nopf;
  if (name == "create-eoc") return DbStyle::create_eoc;
  if (name == "create-eot") return DbStyle::create_eot;
  return std::nullopt;
}

std::string render_content_block(const ContentRows& rows) {
  std::string out = "/*\n";
  out += std::to_string(rows.rows.size());
  out += " example rows from table ";
  out += rows.table_name;
  out += ":\n";
  out += text::join(rows.header, "\t");
  for (const auto& row : rows.rows) {
    out += "\n";
    out += text::join(row, "\t");
  }
  out += "\n**/";
  return out;
}

namespace {

constexpr const char* kIndent = "  ";

void check_rows_keys(const DatabaseSchema& db, const std::map<std::string, ContentRows>* rows) {
  if (!rows) return;
  for (const auto& [name, _] : *rows)
    if (db.table_index(name) < 0)
      throw UnknownTableInRowsError("content rows given for unknown table '" + name + "'");
}

void append_block(std::vector<std::string>& chunks, const DatabaseSchema& db,
                  const TableSchema& table, const std::map<std::string, ContentRows>* rows) {
  if (!rows) return;
  for (const auto& [name, content] : *rows) {
    if (db.table_index(name) >= 0 &&
        text::iequals(db.tables[db.table_index(name)].name, table.name)) {
      chunks.push_back(render_content_block(content));
      return;
    }
  }
}

std::string table_line(const TableSchema& table) {
  std::string out = "# " + table.name + "(";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ", ";
    out += table.columns[i].name;
  }
  out += ")";
  return out;
}

std::string key_summary_lines(const DatabaseSchema& db) {
  std::string pks = "# primary keys = [";
  bool first = true;
  for (const auto& table : db.tables) {
    for (int ci : table.primary_key) {
      if (!first) pks += ", ";
      first = false;
      pks += table.name + "." + table.columns[ci].name;
    }
  }
  pks += "]";

  std::string fks = "# foreign keys = [";
  for (std::size_t i = 0; i < db.foreign_keys.size(); ++i) {
    const auto& fk = db.foreign_keys[i];
    if (i) fks += ", ";
    fks += db.tables[fk.child_table].name + "." +
           db.tables[fk.child_table].columns[fk.child_column].name;
    fks += " = ";
    fks += db.tables[fk.parent_table].name + "." +
           db.tables[fk.parent_table].columns[fk.parent_column].name;
  }
  fks += "]";
  return pks + "\n" + fks;
}

std::string create_block(const DatabaseSchema& db, const TableSchema& table, DbStyle style) {
  int ti = db.table_index(table.name);
  std::vector<std::string> lines;
  bool inline_pk = style == DbStyle::create_eoc && table.primary_key.size() == 1;

  for (std::size_t ci = 0; ci < table.columns.size(); ++ci) {
    std::string line = std::string(kIndent) + table.columns[ci].name + " " +
                       col_type_name(table.columns[ci].type);
    if (style == DbStyle::create_eoc) {
      if (inline_pk && table.primary_key[0] == static_cast<int>(ci)) line += " primary key";
      for (const auto& fk : db.foreign_keys_of(ti)) {
        if (fk.child_column == static_cast<int>(ci)) {
          line += " references " + db.tables[fk.parent_table].name + "(" +
                  db.tables[fk.parent_table].columns[fk.parent_column].name + ")";
        }
      }
    }
    lines.push_back(std::move(line));
  }

  bool tail_pk = !table.primary_key.empty() &&
                 (style == DbStyle::create_eot || (style == DbStyle::create_eoc && !inline_pk));
  if (tail_pk) {
    std::string line = std::string(kIndent) + "primary key (";
    for (std::size_t i = 0; i < table.primary_key.size(); ++i) {
      if (i) line += ", ";
      line += table.columns[table.primary_key[i]].name;
    }
    line += ")";
    lines.push_back(std::move(line));
  }
  if (style == DbStyle::create_eot) {
    for (const auto& fk : db.foreign_keys_of(ti)) {
      lines.push_back(std::string(kIndent) + "foreign key (" +
                      table.columns[fk.child_column].name + ") references " +
                      db.tables[fk.parent_table].name + "(" +
                      db.tables[fk.parent_table].columns[fk.parent_column].name + ")");
    }
  }

  std::string out = "create table " + table.name + " (\n";
  out += text::join(lines, ",\n");
  out += "\n)";
  return out;
}

}  // namespace

SchemaPrompt render_schema(const DatabaseSchema& db, DbStyle style,
                           const std::map<std::string, ContentRows>* rows) {
  check_rows_keys(db, rows);
  int c = 0;
  if (rows)
    for (const auto& [_, content] : *rows)
      c = std::max(c, static_cast<int>(content.rows.size()));

  std::vector<std::string> chunks;
  for (const auto& table : db.tables) {
    switch (style) {
      case DbStyle::table_column:
      case DbStyle::table_column_pf:
        chunks.push_back(table_line(table));
        break;
      default:
        chunks.push_back(create_block(db, table, style));
        break;
    }
    append_block(chunks, db, table, rows);
  }
  if (style == DbStyle::table_column_pf && !db.tables.empty())
    chunks.push_back(key_summary_lines(db));

  SchemaPrompt out;
  out.style = style;
  out.content_rows = c;
  out.text = text::join(chunks, "\n");
  return out;
}

}  // namespace actsql
