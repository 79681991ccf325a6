#pragma once

#include <map>
#include <string>
#include <vector>

#include "actsql/schema.hpp"
#include "actsql/sqlite_db.hpp"

namespace actsql {

struct ContentRows {
  std::string table_name;            // original casing
  std::vector<std::string> header;   // column names, schema order
  std::vector<std::vector<std::string>> rows;  // rendered cell values
};

// Conventional on-disk layout: <db_root>/<db_id>/<db_id>.sqlite.
std::string database_path(const std::string& db_root, const std::string& db_id);

// Renders one stored value the way it appears in prompt content rows:
// integers without a decimal point, reals in shortest fixed notation with a
// ".0" suffix when integral, NULL as the empty string, text verbatim. Blobs
// cannot be rendered and raise ValueRenderFailureError.
std::string render_cell(const Cell& cell);

// Reads the first min(c, rowcount) rows of `table` in natural storage order
// from an already opened connection. Columns follow the schema declaration
// order. c = 0 yields an empty row list.
ContentRows sample_content_rows(const SqliteDb& db, const TableSchema& table, int c);

// Convenience overload opening <db_root>/<db_id>/<db_id>.sqlite read-only.
ContentRows sample_content_rows(const std::string& db_root, const DatabaseSchema& schema,
                                const std::string& table_name, int c);

// Samples every table of a database in one pass; keys are table names.
std::map<std::string, ContentRows> sample_all_tables(const std::string& sqlite_path,
                                                     const DatabaseSchema& schema, int c);

}  // namespace actsql
