#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace actsql {

enum class ColType { number, text, time, boolean, others };

std::string col_type_name(ColType t);
std::optional<ColType> col_type_from(const std::string& name);

struct ColumnSchema {
  std::string name;  // original casing, e.g. "Stadium_ID"
  ColType type = ColType::others;
};

struct TableSchema {
  std::string name;  // original casing
  std::vector<ColumnSchema> columns;
  std::vector<int> primary_key;  // column indices, declaration order

  // Case-insensitive lookup; -1 when absent.
  int column_index(const std::string& column_name) const;
};

struct ForeignKey {
  int child_table = -1;
  int child_column = -1;
  int parent_table = -1;
  int parent_column = -1;
};

struct DatabaseSchema {
  std::string db_id;
  std::vector<TableSchema> tables;
  std::vector<ForeignKey> foreign_keys;  // declaration order

  int table_index(const std::string& table_name) const;  // case-insensitive, -1 when absent
  std::vector<ForeignKey> foreign_keys_of(int table_idx) const;
  bool column_in_primary_key(int table_idx, int column_idx) const;
  // First foreign key whose child is (table_idx, column_idx), if any.
  std::optional<ForeignKey> foreign_key_from(int table_idx, int column_idx) const;
};

class SchemaCatalog {
 public:
  SchemaCatalog() = default;
  explicit SchemaCatalog(std::vector<DatabaseSchema> dbs);

  const DatabaseSchema& db(const std::string& db_id) const;  // throws UnknownDbIdError
  bool has(const std::string& db_id) const;
  const std::vector<DatabaseSchema>& databases() const { return dbs_; }

 private:
  std::vector<DatabaseSchema> dbs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Loads a schema catalog from a JSON document holding an array of database
// descriptions (db_id, table_names_original, column_names_original with the
// leading [-1, "*"] sentinel, column_types, primary_keys, foreign_keys).
SchemaCatalog load_schema_catalog(const std::string& path);
SchemaCatalog parse_schema_catalog(const std::string& json_text, const std::string& origin);

// Serializes back to the same document format load_schema_catalog reads.
std::string catalog_to_json(const SchemaCatalog& catalog);

bool operator==(const ColumnSchema& a, const ColumnSchema& b);
bool operator==(const TableSchema& a, const TableSchema& b);
bool operator==(const ForeignKey& a, const ForeignKey& b);
bool operator==(const DatabaseSchema& a, const DatabaseSchema& b);

}  // namespace actsql
