#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "actsql/auto_cot.hpp"
#include "actsql/dataset.hpp"
#include "actsql/prompt_style.hpp"
#include "actsql/schema.hpp"
#include "actsql/similarity.hpp"
#include "actsql/sql/parser.hpp"
#include "actsql/sql/summary.hpp"

namespace {

using namespace actsql;

DatabaseSchema concert_schema() {
  auto table = [](std::string name, std::vector<std::string> columns) {
    TableSchema t;
    t.name = std::move(name);
    for (auto& c : columns) t.columns.push_back({std::move(c), ColType::text});
    t.primary_key = {0};
    return t;
  };
  DatabaseSchema db;
  db.db_id = "concert_singer";
  db.tables = {
      table("stadium", {"Stadium_ID", "Location", "Name", "Capacity", "Highest", "Lowest",
                        "Average"}),
      table("singer", {"Singer_ID", "Name", "Country", "Song_Name", "Song_release_year",
                       "Age", "Is_male"}),
      table("concert", {"concert_ID", "concert_Name", "Theme", "Stadium_ID", "Year"}),
      table("singer_in_concert", {"concert_ID", "Singer_ID"}),
  };
  db.foreign_keys = {{2, 3, 0, 0}, {3, 0, 2, 0}, {3, 1, 1, 0}};
  return db;
}

const char* kJoinQuery =
    "SELECT T2.name , count(*) FROM concert AS T1 JOIN stadium AS T2 "
    "ON T1.stadium_id = T2.stadium_id WHERE T1.year >= 2014 "
    "GROUP BY T2.stadium_id ORDER BY count(*) DESC LIMIT 3";

const char* kQuestion =
    "Show the stadium name and the number of concerts in each stadium held after 2014 .";

void BM_RenderSchema(benchmark::State& state) {
  DatabaseSchema db = concert_schema();
  for (auto _ : state) {
    SchemaPrompt prompt = render_schema(db, DbStyle::create_eot);
    benchmark::DoNotOptimize(prompt.text);
  }
}
BENCHMARK(BM_RenderSchema);

void BM_ParseSql(benchmark::State& state) {
  DatabaseSchema db = concert_schema();
  for (auto _ : state) {
    sql::SqlAst ast = sql::parse_sql(kJoinQuery, db);
    benchmark::DoNotOptimize(ast);
  }
}
BENCHMARK(BM_ParseSql);

void BM_SummarizeSql(benchmark::State& state) {
  DatabaseSchema db = concert_schema();
  sql::SqlAst ast = sql::parse_sql(kJoinQuery, db);
  for (auto _ : state) {
    sql::SqlSummary summary = sql::summarize(ast);
    benchmark::DoNotOptimize(summary);
  }
}
BENCHMARK(BM_SummarizeSql);

void BM_EnumerateSlices(benchmark::State& state) {
  std::vector<std::string> tokens = tokenize_question_cased(kQuestion);
  for (auto _ : state) {
    auto slices = enumerate_slices(tokens, 8);
    benchmark::DoNotOptimize(slices);
  }
}
BENCHMARK(BM_EnumerateSlices);

void BM_LinkSchemaItems(benchmark::State& state) {
  DatabaseSchema db = concert_schema();
  sql::SqlSummary summary = sql::summarize(sql::parse_sql(kJoinQuery, db));
  std::vector<std::string> tokens = tokenize_question_cased(kQuestion);
  LexicalTrigramSimilarity sim;
  for (auto _ : state) {
    auto links = link_schema_items(summary, db, tokens, sim);
    benchmark::DoNotOptimize(links);
  }
}
BENCHMARK(BM_LinkSchemaItems);

void BM_TrigramSimilarity(benchmark::State& state) {
  LexicalTrigramSimilarity sim;
  for (auto _ : state) {
    double s = sim.similarity("stadium name", "the stadium name and the number of concerts");
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_TrigramSimilarity);

}  // namespace

BENCHMARK_MAIN();
