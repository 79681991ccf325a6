#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "actsql/sql/canonical.hpp"
#include "actsql/sql/difficulty.hpp"
#include "actsql/sql/parser.hpp"
#include "actsql/sql/summary.hpp"
#include "support.hpp"

using namespace actsql;
using json = nlohmann::json;

namespace {

json load_json(const std::string& name) {
  return json::parse(testsupport::read_file(testsupport::fixture_path(name)));
}

const Example& example_by_id(const std::string& id) {
  for (const auto& ex : testsupport::train_examples())
    if (ex.source_id == id) return ex;
  for (const auto& ex : testsupport::test_examples())
    if (ex.source_id == id) return ex;
  throw std::runtime_error("no fixture example " + id);
}

}  // namespace

TEST_CASE("every fixture gold query parses and matches itself") {
  auto check_all = [](const std::vector<Example>& examples) {
    for (const auto& ex : examples) {
      const DatabaseSchema& db = testsupport::catalog().db(ex.db_id);
      CHECK_NOTHROW(sql::parse_sql(ex.gold_sql, db));
      CHECK(sql::exact_match(ex.gold_sql, ex.gold_sql, db));
    }
  };
  check_all(testsupport::train_examples());
  check_all(testsupport::test_examples());
}

TEST_CASE("statement summaries match the hand-checked table") {
  json cases = load_json("summary_cases.json");
  REQUIRE(cases.size() == 20);
  for (const auto& c : cases) {
    const Example& ex = example_by_id(c["id"].get<std::string>());
    const DatabaseSchema& db = testsupport::catalog().db(ex.db_id);
    sql::SqlSummary sum = sql::summarize(sql::parse_sql(ex.gold_sql, db));
    INFO("example ", ex.source_id);

    std::vector<std::string> got_columns;
    for (auto [t, col] : sum.linked_columns)
      got_columns.push_back(db.tables[t].name + "." + db.tables[t].columns[col].name);
    CHECK(got_columns == c["columns"].get<std::vector<std::string>>());

    std::vector<std::string> got_tables;
    for (int t : sum.from_only_tables) got_tables.push_back(db.tables[t].name);
    CHECK(got_tables == c["tables"].get<std::vector<std::string>>());

    CHECK(sum.values == c["values"].get<std::vector<std::string>>());
  }
}

TEST_CASE("group-by-only and join-on-only columns never get linked") {
  int checked = 0;
  for (const DatabaseSchema& db : testsupport::catalog().databases()) {
    for (const TableSchema& t : db.tables) {
      if (t.columns.size() < 2) continue;
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        std::string grouped = t.columns[c].name;
        std::string query = "SELECT count(*) FROM " + t.name + " GROUP BY " + grouped;
        sql::SqlSummary sum = sql::summarize(sql::parse_sql(query, db));
        CHECK(sum.linked_columns.empty());
        REQUIRE(sum.from_only_tables.size() == 1);
        CHECK(db.tables[sum.from_only_tables[0]].name == t.name);

        std::string other = t.columns[(c + 1) % t.columns.size()].name;
        std::string query2 =
            "SELECT " + other + " FROM " + t.name + " GROUP BY " + grouped + " , " + other;
        sql::SqlSummary sum2 = sql::summarize(sql::parse_sql(query2, db));
        for (auto [ti, ci] : sum2.linked_columns)
          CHECK(db.tables[ti].columns[ci].name != grouped);
        checked += 2;
      }
    }
    for (const ForeignKey& fk : db.foreign_keys) {
      const TableSchema& child = db.tables[fk.child_table];
      const TableSchema& parent = db.tables[fk.parent_table];
      if (fk.child_table == fk.parent_table) continue;
      std::string pick;
      for (const auto& col : parent.columns)
        if (col.name != parent.columns[fk.parent_column].name) pick = col.name;
      if (pick.empty()) continue;
      std::string query = "SELECT T2." + pick + " FROM " + child.name + " AS T1 JOIN " +
                          parent.name + " AS T2 ON T1." + child.columns[fk.child_column].name +
                          " = T2." + parent.columns[fk.parent_column].name;
      sql::SqlSummary sum = sql::summarize(sql::parse_sql(query, db));
      REQUIRE(sum.linked_columns.size() == 1);
      CHECK(db.tables[sum.linked_columns[0].first].name == parent.name);
      CHECK(parent.columns[sum.linked_columns[0].second].name == pick);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("curated match pairs score the documented verdicts") {
  json pairs = load_json("em_pairs.json");
  REQUIRE(pairs.size() == 20);
  for (const auto& p : pairs) {
    const DatabaseSchema& db = testsupport::catalog().db(p["db_id"].get<std::string>());
    bool expected = p["match"].get<bool>();
    INFO(p["note"].get<std::string>());
    CHECK(sql::exact_match(p["pred"].get<std::string>(), p["gold"].get<std::string>(), db) ==
          expected);
    // The comparison treats both sides the same way.
    CHECK(sql::exact_match(p["gold"].get<std::string>(), p["pred"].get<std::string>(), db) ==
          expected);
  }
}

TEST_CASE("randomized literal substitution never flips the verdict") {
  const DatabaseSchema& singer = testsupport::catalog().db("singer");
  const DatabaseSchema& stadium_db = testsupport::catalog().db("concert_singer");
  std::mt19937 rng(20240817);
  auto random_word = [&rng] {
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_int_distribution<int> ch('a', 'z');
    std::string s;
    for (int i = 0, n = len(rng); i < n; ++i) s.push_back(static_cast<char>(ch(rng)));
    return s;
  };
  int flips = 0;
  for (int i = 0; i < 500; ++i) {
    std::string w = random_word();
    std::string q = "SELECT Name FROM singer WHERE Citizenship != '" + w + "'";
    if (!sql::exact_match(q, "SELECT Name FROM singer WHERE Citizenship != 'France'", singer))
      ++flips;
  }
  std::uniform_int_distribution<int> num(0, 1000000);
  for (int i = 0; i < 500; ++i) {
    std::string q = "SELECT Name FROM stadium WHERE Capacity > " +
                    std::to_string(num(rng)) + " ORDER BY Average LIMIT " +
                    std::to_string(1 + num(rng) % 50);
    if (!sql::exact_match(
            q, "SELECT Name FROM stadium WHERE Capacity > 5000 ORDER BY Average LIMIT 3",
            stadium_db))
      ++flips;
  }
  CHECK(flips == 0);
}

TEST_CASE("difficulty labels for hand-computed queries") {
  auto level = [](const std::string& query, const std::string& db_id) {
    const DatabaseSchema& db = testsupport::catalog().db(db_id);
    return sql::difficulty(sql::parse_sql(query, db));
  };
  CHECK(level("SELECT count(*) FROM singer", "concert_singer") == sql::Difficulty::easy);
  CHECK(level("SELECT Name FROM stadium WHERE Capacity > 5000", "concert_singer") ==
        sql::Difficulty::easy);
  CHECK(level("SELECT name , country FROM singer WHERE age > 20", "concert_singer") ==
        sql::Difficulty::medium);
  CHECK(level("SELECT destination FROM Flight GROUP BY destination ORDER BY count(*) LIMIT 1",
              "flight_1") == sql::Difficulty::hard);
  CHECK(level("SELECT name , distance FROM Aircraft WHERE distance > (SELECT avg(distance) "
              "FROM Aircraft)",
              "flight_1") == sql::Difficulty::extra);
  CHECK(std::string(sql::difficulty_name(sql::Difficulty::extra)) == "extra");
}

TEST_CASE("binding failures carry their own error types") {
  const DatabaseSchema& bank = testsupport::catalog().db("small_bank_1");
  CHECK_THROWS_AS(sql::parse_sql("SELECT x FROM no_table", bank), UnknownTableError);
  CHECK_THROWS_AS(sql::parse_sql("SELECT missing FROM accounts", bank),
                  UnresolvableColumnError);
  // balance exists in both SAVINGS and CHECKING.
  CHECK_THROWS_AS(
      sql::parse_sql(
          "SELECT balance FROM savings JOIN checking ON savings.custid = checking.custid",
          bank),
      AmbiguousColumnError);
  CHECK_THROWS_AS(sql::parse_sql("SELECT FROM accounts", bank), SqlSyntaxError);
  CHECK_THROWS_AS(sql::parse_sql("", bank), SqlSyntaxError);
}

TEST_CASE("normalization is stable across equivalent spellings") {
  const DatabaseSchema& db = testsupport::catalog().db("concert_singer");
  sql::CanonicalSql a = sql::normalize_for_em("SELECT T1.Name FROM stadium AS T1", db);
  sql::CanonicalSql b = sql::normalize_for_em("select name from STADIUM", db);
  CHECK(a == b);
  sql::CanonicalSql c =
      sql::normalize_for_em("SELECT Location FROM stadium", db);
  CHECK_FALSE(a == c);
}
