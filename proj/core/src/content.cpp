#include "actsql/content.hpp"

#include "actsql/errors.hpp"
#include "actsql/text.hpp"

namespace actsql {

std::string database_path(const std::string& db_root, const std::string& db_id) {
  return db_root + "/" + db_id + "/" + db_id + ".sqlite";
}

std::string render_cell(const Cell& cell) {
  switch (cell.kind) {
    case Cell::Kind::null:
      return "";
    case Cell::Kind::integer:
      return std::to_string(cell.i);
    case Cell::Kind::real:
      return text::render_real(cell.d);
    case Cell::Kind::text:
      return cell.s;
    case Cell::Kind::blob:
      break;
  }
  throw ValueRenderFailureError("blob value cannot be rendered as prompt content");
}

ContentRows sample_content_rows(const SqliteDb& db, const TableSchema& table, int c) {
  if (c < 0) throw ConfigInvariantError("content row count must be >= 0");
  ContentRows out;
  out.table_name = table.name;
  for (const auto& col : table.columns) out.header.push_back(col.name);
  if (c == 0) return out;

  std::string sql = "SELECT ";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) sql += ", ";
    sql += "\"" + table.columns[i].name + "\"";
  }
  sql += " FROM \"" + table.name + "\" LIMIT " + std::to_string(c);
  ResultSet rs;
  try {
    rs = db.query(sql);
  } catch (const SqlExecutionError& e) {
    throw MissingTableError("cannot sample rows from table '" + table.name + "': " + e.what());
  }
  for (const auto& row : rs.rows) {
    std::vector<std::string> rendered;
    rendered.reserve(row.size());
    for (const auto& cell : row) rendered.push_back(render_cell(cell));
    out.rows.push_back(std::move(rendered));
  }
  return out;
}

ContentRows sample_content_rows(const std::string& db_root, const DatabaseSchema& schema,
                                const std::string& table_name, int c) {
  int ti = schema.table_index(table_name);
  if (ti < 0)
    throw MissingTableError("table '" + table_name + "' not in schema of '" + schema.db_id + "'");
  SqliteDb db(database_path(db_root, schema.db_id), SqliteDb::OpenMode::read_only);
  return sample_content_rows(db, schema.tables[ti], c);
}

std::map<std::string, ContentRows> sample_all_tables(const std::string& sqlite_path,
                                                     const DatabaseSchema& schema, int c) {
  SqliteDb db(sqlite_path, SqliteDb::OpenMode::read_only);
  std::map<std::string, ContentRows> out;
  for (const auto& table : schema.tables) out[table.name] = sample_content_rows(db, table, c);
  return out;
}

}  // namespace actsql
