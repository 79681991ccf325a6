#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

struct sqlite3;

namespace actsql {

struct Cell {
  enum class Kind { null, integer, real, text, blob };
  Kind kind = Kind::null;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;  // text or raw blob bytes

  static Cell null_cell() { return Cell{}; }
  static Cell of(std::int64_t v) { return Cell{Kind::integer, v, 0.0, {}}; }
  static Cell of(double v) { return Cell{Kind::real, 0, v, {}}; }
  static Cell of_text(std::string v) { return Cell{Kind::text, 0, 0.0, std::move(v)}; }
  static Cell of_blob(std::string v) { return Cell{Kind::blob, 0, 0.0, std::move(v)}; }
};

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Thin RAII wrapper over a SQLite connection. Evaluation and content
// sampling open databases read-only; read_write_create exists for building
// fixture databases.
class SqliteDb {
 public:
  enum class OpenMode { read_only, read_write_create };

  SqliteDb(const std::string& path, OpenMode mode);
  ~SqliteDb();
  SqliteDb(const SqliteDb&) = delete;
  SqliteDb& operator=(const SqliteDb&) = delete;
  SqliteDb(SqliteDb&&) noexcept;
  SqliteDb& operator=(SqliteDb&&) noexcept;

  // Runs one or more statements, discarding any rows. Fixture setup only.
  void exec(const std::string& sql);

  // Runs a single query and collects its rows. A zero timeout disables the
  // deadline. Throws ExecutionTimeoutError when the deadline interrupts the
  // query and SqlExecutionError on any other failure.
  ResultSet query(const std::string& sql,
                  std::chrono::milliseconds timeout = std::chrono::milliseconds(0)) const;

  sqlite3* raw() const { return db_; }

 private:
  sqlite3* db_ = nullptr;
};

}  // namespace actsql
