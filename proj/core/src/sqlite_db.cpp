#include "actsql/sqlite_db.hpp"

#include <sqlite3.h>

#include "actsql/errors.hpp"

namespace actsql {

namespace {

struct Deadline {
  std::chrono::steady_clock::time_point at;
  bool expired = false;
};

extern "C" int progress_cb(void* ctx) {
  auto* d = static_cast<Deadline*>(ctx);
  if (std::chrono::steady_clock::now() >= d->at) {
    d->expired = true;
    return 1;  // interrupt the statement
  }
  return 0;
}

}  // namespace

SqliteDb::SqliteDb(const std::string& path, OpenMode mode) {
  int flags = mode == OpenMode::read_only ? SQLITE_OPEN_READONLY
                                          : SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE;
  int rc = sqlite3_open_v2(path.c_str(), &db_, flags, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    if (db_) sqlite3_close(db_);
    db_ = nullptr;
    throw MissingDatabaseError("cannot open database '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(db_, 2000);
}

SqliteDb::~SqliteDb() {
  if (db_) sqlite3_close(db_);
}

SqliteDb::SqliteDb(SqliteDb&& other) noexcept : db_(other.db_) { other.db_ = nullptr; }

SqliteDb& SqliteDb::operator=(SqliteDb&& other) noexcept {
  if (this != &other) {
    if (db_) sqlite3_close(db_);
    db_ = other.db_;
    other.db_ = nullptr;
  }
  return *this;
}

void SqliteDb::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw SqlExecutionError("exec failed: " + msg);
  }
}

ResultSet SqliteDb::query(const std::string& sql, std::chrono::milliseconds timeout) const {
  Deadline deadline;
  if (timeout.count() > 0) {
    deadline.at = std::chrono::steady_clock::now() + timeout;
    sqlite3_progress_handler(db_, 500, progress_cb, &deadline);
  }

  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, &tail);
  if (rc != SQLITE_OK) {
    std::string msg = sqlite3_errmsg(db_);
    if (timeout.count() > 0) sqlite3_progress_handler(db_, 0, nullptr, nullptr);
    if (deadline.expired) throw ExecutionTimeoutError("query interrupted by timeout");
    throw SqlExecutionError("prepare failed: " + msg);
  }
  if (tail && *tail) {
    // Reject trailing statements; a single query is expected here.
    for (const char* p = tail; *p; ++p) {
      if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') {
        sqlite3_finalize(stmt);
        if (timeout.count() > 0) sqlite3_progress_handler(db_, 0, nullptr, nullptr);
        throw SqlExecutionError("multiple statements are not allowed");
      }
    }
  }

  ResultSet rs;
  int ncol = sqlite3_column_count(stmt);
  for (int i = 0; i < ncol; ++i) {
    const char* name = sqlite3_column_name(stmt, i);
    rs.columns.push_back(name ? name : "");
  }

  while (true) {
    rc = sqlite3_step(stmt);
    if (rc == SQLITE_ROW) {
      std::vector<Cell> row;
      row.reserve(ncol);
      for (int i = 0; i < ncol; ++i) {
        switch (sqlite3_column_type(stmt, i)) {
          case SQLITE_NULL:
            row.push_back(Cell::null_cell());
            break;
          case SQLITE_INTEGER:
            row.push_back(Cell::of(static_cast<std::int64_t>(sqlite3_column_int64(stmt, i))));
            break;
          case SQLITE_FLOAT:
            row.push_back(Cell::of(sqlite3_column_double(stmt, i)));
            break;
          case SQLITE_TEXT: {
            const unsigned char* t = sqlite3_column_text(stmt, i);
            int n = sqlite3_column_bytes(stmt, i);
            row.push_back(Cell::of_text(std::string(reinterpret_cast<const char*>(t), n)));
            break;
          }
          default: {
            const void* b = sqlite3_column_blob(stmt, i);
            int n = sqlite3_column_bytes(stmt, i);
            row.push_back(Cell::of_blob(std::string(static_cast<const char*>(b), n)));
            break;
          }
        }
      }
      rs.rows.push_back(std::move(row));
      continue;
    }
    break;
  }

  bool timed_out = deadline.expired;
  std::string msg = rc == SQLITE_DONE ? "" : sqlite3_errmsg(db_);
  sqlite3_finalize(stmt);
  if (timeout.count() > 0) sqlite3_progress_handler(db_, 0, nullptr, nullptr);
  if (rc != SQLITE_DONE) {
    if (timed_out) throw ExecutionTimeoutError("query interrupted by timeout");
    throw SqlExecutionError("step failed: " + msg);
  }
  return rs;
}

}  // namespace actsql
