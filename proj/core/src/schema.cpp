#include "actsql/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "actsql/text.hpp"

namespace actsql {

using nlohmann::json;

std::string col_type_name(ColType t) {
  switch (t) {
    case ColType::number: return "number";
    case ColType::text: return "text";
    case ColType::time: return "time";
    case ColType::boolean: return "boolean";
    case ColType::others: return "others";
  }
  return "others";
}

std::optional<ColType> col_type_from(const std::string& name) {
  if (name == "number") return ColType::number;
  if (name == "text") return ColType::text;
  if (name == "time") return ColType::time;
  if (name == "boolean") return ColType::boolean;
  if (name == "others") return ColType::others;
  return std::nullopt;
}

int TableSchema::column_index(const std::string& column_name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (text::iequals(columns[i].name, column_name)) return static_cast<int>(i);
  return -1;
}

int DatabaseSchema::table_index(const std::string& table_name) const {
  for (std::size_t i = 0; i < tables.size(); ++i)
    if (text::iequals(tables[i].name, table_name)) return static_cast<int>(i);
  return -1;
}

std::vector<ForeignKey> DatabaseSchema::foreign_keys_of(int table_idx) const {
  std::vector<ForeignKey> out;
  for (const auto& fk : foreign_keys)
    if (fk.child_table == table_idx) out.push_back(fk);
  return out;
}

bool DatabaseSchema::column_in_primary_key(int table_idx, int column_idx) const {
  const auto& pk = tables.at(table_idx).primary_key;
  for (int c : pk)
    if (c == column_idx) return true;
  return false;
}

std::optional<ForeignKey> DatabaseSchema::foreign_key_from(int table_idx, int column_idx) const {
  for (const auto& fk : foreign_keys)
    if (fk.child_table == table_idx && fk.child_column == column_idx) return fk;
  return std::nullopt;
}

SchemaCatalog::SchemaCatalog(std::vector<DatabaseSchema> dbs) : dbs_(std::move(dbs)) {
  for (std::size_t i = 0; i < dbs_.size(); ++i) {
    if (dbs_[i].db_id.empty())
      throw MalformedDocumentError("schema catalog: empty db_id at position " + std::to_string(i));
    if (!by_id_.emplace(dbs_[i].db_id, i).second)
      throw MalformedDocumentError("schema catalog: duplicate db_id '" + dbs_[i].db_id + "'");
  }
}

const DatabaseSchema& SchemaCatalog::db(const std::string& db_id) const {
  auto it = by_id_.find(db_id);
  if (it == by_id_.end()) throw UnknownDbIdError("unknown db_id '" + db_id + "'");
  return dbs_[it->second];
}

bool SchemaCatalog::has(const std::string& db_id) const { return by_id_.count(db_id) != 0; }

namespace {

[[noreturn]] void malformed(const std::string& origin, const std::string& what) {
  throw MalformedDocumentError(origin + ": " + what);
}

DatabaseSchema parse_database(const json& doc, const std::string& origin) {
  DatabaseSchema db;
  if (!doc.is_object()) malformed(origin, "database entry is not an object");
  if (!doc.contains("db_id") || !doc["db_id"].is_string()) malformed(origin, "missing db_id");
  db.db_id = doc["db_id"].get<std::string>();
  const std::string where = origin + " db '" + db.db_id + "'";

  for (const char* field : {"table_names_original", "column_names_original", "column_types",
                            "primary_keys", "foreign_keys"}) {
    if (!doc.contains(field) || !doc[field].is_array()) malformed(where, std::string("missing array field ") + field);
  }

  std::set<std::string> seen_tables;
  for (const auto& t : doc["table_names_original"]) {
    if (!t.is_string()) malformed(where, "table name is not a string");
    TableSchema ts;
    ts.name = t.get<std::string>();
    if (ts.name.empty()) malformed(where, "empty table name");
    if (!seen_tables.insert(text::to_lower(ts.name)).second)
      malformed(where, "duplicate table name '" + ts.name + "'");
    db.tables.push_back(std::move(ts));
  }

  const auto& cols = doc["column_names_original"];
  const auto& types = doc["column_types"];
  if (types.size() != cols.size())
    malformed(where, "column_types length does not match column_names_original");

  // Global column index -> (table, local column). Index 0 is the [-1, "*"]
  // sentinel, which owns no table and is skipped.
  std::vector<std::pair<int, int>> global;
  global.reserve(cols.size());
  for (std::size_t ci = 0; ci < cols.size(); ++ci) {
    const auto& entry = cols[ci];
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
        !entry[1].is_string())
      malformed(where, "column entry " + std::to_string(ci) + " is not [table_index, name]");
    int ti = entry[0].get<int>();
    std::string name = entry[1].get<std::string>();
    if (ti == -1) {
      global.emplace_back(-1, -1);
      continue;
    }
    if (ti < 0 || ti >= static_cast<int>(db.tables.size()))
      malformed(where, "column entry " + std::to_string(ci) + " references missing table " +
                           std::to_string(ti));
    if (name.empty()) malformed(where, "empty column name in table '" + db.tables[ti].name + "'");
    ColumnSchema cs;
    cs.name = name;
    if (!types[ci].is_string()) malformed(where, "column type " + std::to_string(ci) + " is not a string");
    auto ct = col_type_from(types[ci].get<std::string>());
    if (!ct)
      malformed(where, "unknown column type '" + types[ci].get<std::string>() + "'");
    cs.type = *ct;
    auto& table = db.tables[ti];
    if (table.column_index(name) != -1)
      malformed(where, "duplicate column '" + name + "' in table '" + table.name + "'");
    table.columns.push_back(std::move(cs));
    global.emplace_back(ti, static_cast<int>(table.columns.size()) - 1);
  }

  auto resolve_global = [&](int gci, const char* role) -> std::pair<int, int> {
    if (gci <= 0 || gci >= static_cast<int>(global.size()) || global[gci].first < 0)
      throw DanglingKeyReferenceError(where + ": " + role + " references column index " +
                                      std::to_string(gci));
    return global[gci];
  };

  for (const auto& pk : doc["primary_keys"]) {
    // Spider stores either a bare index or (rarely) a list for composite keys.
    std::vector<int> indices;
    if (pk.is_number_integer()) {
      indices.push_back(pk.get<int>());
    } else if (pk.is_array()) {
      for (const auto& v : pk) {
        if (!v.is_number_integer()) malformed(where, "primary key entry is not an integer");
        indices.push_back(v.get<int>());
      }
    } else {
      malformed(where, "primary key entry is not an integer or list");
    }
    for (int gci : indices) {
      auto [ti, ci] = resolve_global(gci, "primary_keys");
      db.tables[ti].primary_key.push_back(ci);
    }
  }

  for (const auto& fk : doc["foreign_keys"]) {
    if (!fk.is_array() || fk.size() != 2 || !fk[0].is_number_integer() ||
        !fk[1].is_number_integer())
      malformed(where, "foreign key entry is not a pair of column indices");
    auto [cti, cci] = resolve_global(fk[0].get<int>(), "foreign_keys");
    auto [pti, pci] = resolve_global(fk[1].get<int>(), "foreign_keys");
    db.foreign_keys.push_back(ForeignKey{cti, cci, pti, pci});
  }
  return db;
}

}  // namespace

SchemaCatalog parse_schema_catalog(const std::string& json_text, const std::string& origin) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) malformed(origin, "invalid JSON");
  if (!doc.is_array()) malformed(origin, "top level is not an array");
  std::vector<DatabaseSchema> dbs;
  dbs.reserve(doc.size());
  for (const auto& entry : doc) dbs.push_back(parse_database(entry, origin));
  return SchemaCatalog(std::move(dbs));
}

SchemaCatalog load_schema_catalog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open schema catalog '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_catalog(buf.str(), path);
}

std::string catalog_to_json(const SchemaCatalog& catalog) {
  json out = json::array();
  for (const auto& db : catalog.databases()) {
    json entry;
    entry["db_id"] = db.db_id;
    json tnames = json::array();
    for (const auto& t : db.tables) tnames.push_back(t.name);
    entry["table_names_original"] = tnames;

    json cnames = json::array();
    json ctypes = json::array();
    cnames.push_back(json::array({-1, "*"}));
    ctypes.push_back("text");
    // Global index bookkeeping mirrors the on-disk layout.
    std::vector<std::vector<int>> global_of(db.tables.size());
    int next = 1;
    for (std::size_t ti = 0; ti < db.tables.size(); ++ti) {
      for (const auto& c : db.tables[ti].columns) {
        cnames.push_back(json::array({static_cast<int>(ti), c.name}));
        ctypes.push_back(col_type_name(c.type));
        global_of[ti].push_back(next++);
      }
    }
    entry["column_names_original"] = cnames;
    entry["column_types"] = ctypes;

    json pks = json::array();
    for (std::size_t ti = 0; ti < db.tables.size(); ++ti)
      for (int ci : db.tables[ti].primary_key) pks.push_back(global_of[ti][ci]);
    entry["primary_keys"] = pks;

    json fks = json::array();
    for (const auto& fk : db.foreign_keys)
      fks.push_back(json::array(
          {global_of[fk.child_table][fk.child_column], global_of[fk.parent_table][fk.parent_column]}));
    entry["foreign_keys"] = fks;
    out.push_back(std::move(entry));
  }
  return out.dump(2);
}

bool operator==(const ColumnSchema& a, const ColumnSchema& b) {
  return a.name == b.name && a.type == b.type;
}
bool operator==(const TableSchema& a, const TableSchema& b) {
  return a.name == b.name && a.columns == b.columns && a.primary_key == b.primary_key;
}
bool operator==(const ForeignKey& a, const ForeignKey& b) {
  return a.child_table == b.child_table && a.child_column == b.child_column &&
         a.parent_table == b.parent_table && a.parent_column == b.parent_column;
}
bool operator==(const DatabaseSchema& a, const DatabaseSchema& b) {
  return a.db_id == b.db_id && a.tables == b.tables && a.foreign_keys == b.foreign_keys;
}

}  // namespace actsql
