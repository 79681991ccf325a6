#include <doctest.h>

#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include <nlohmann/json.hpp>

#include "actsql/auto_cot.hpp"
#include "actsql/content.hpp"
#include "actsql/errors.hpp"
#include "actsql/pipeline.hpp"
#include "actsql/text.hpp"
#include "support.hpp"

using namespace actsql;
using testsupport::golden;

namespace {

std::map<std::string, std::map<std::string, ContentRows>> g_rows_cache;
std::mutex g_rows_mu;

RowsProvider workspace_rows() {
  return [](const std::string& db_id) -> const std::map<std::string, ContentRows>* {
    std::lock_guard<std::mutex> lock(g_rows_mu);
    auto it = g_rows_cache.find(db_id);
    if (it == g_rows_cache.end()) {
      const auto& ws = testsupport::Workspace::instance();
      std::string path = database_path(ws.db_root(), db_id);
      it = g_rows_cache.emplace(db_id, sample_all_tables(path, testsupport::catalog().db(db_id), 3))
               .first;
    }
    return &it->second;
  };
}

const ExemplarPool& pool20() {
  static LexicalTrigramSimilarity sim;
  static ExemplarPool pool(testsupport::train_examples(), sim);
  return pool;
}

std::size_t pool_index(const std::string& source_id) {
  const auto& examples = pool20().examples();
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (examples[i].source_id == source_id) return i;
  FAIL("no pool entry " << source_id);
  return 0;
}

std::string user_turn(const std::string& schema_golden, const std::string& question) {
  return "Database schema:\n" + golden(schema_golden) + "\nQuestion: " + question;
}

const Example& example_by_id(const std::vector<Example>& set, const std::string& id) {
  for (const auto& e : set)
    if (e.source_id == id) return e;
  FAIL("no example " << id);
  static Example dummy;
  return dummy;
}

}  // namespace

TEST_CASE("prompt mode names round-trip") {
  for (PromptMode m : {PromptMode::zero_shot, PromptMode::few_shot, PromptMode::act_sql})
    CHECK(prompt_mode_from(prompt_mode_name(m)) == m);
  CHECK(prompt_mode_from("act_sql") == PromptMode::act_sql);
  CHECK_FALSE(prompt_mode_from("chain").has_value());
}

TEST_CASE("zero-shot prompt is a system turn plus one user turn") {
  PipelineConfig config;
  config.mode = PromptMode::zero_shot;
  config.style = DbStyle::create_eot;

  PromptBundle bundle =
      build_prompt(testsupport::catalog().db("concert_singer"), "How many singers do we have?",
                   {}, pool20(), testsupport::catalog(), config, nullptr);
  REQUIRE(bundle.messages.size() == 2);
  CHECK(bundle.exemplars.empty());
  CHECK(bundle.messages[0] == ChatMessage{Role::system, kSystemInstruction});
  CHECK(bundle.messages[1] ==
        ChatMessage{Role::user, user_turn("concert_singer.create-eot.c0.txt",
                                          "How many singers do we have?")});
}

TEST_CASE("few-shot prompt interleaves schema questions with gold SQL") {
  PipelineConfig config;
  config.mode = PromptMode::few_shot;
  config.style = DbStyle::create_eot;

  std::vector<std::pair<std::string, std::string>> picks = {
      {"tr_sav_top3", "small_bank_1.create-eot.c3.txt"},
      {"tr_least_dest", "flight_1.create-eot.c3.txt"},
      {"tr_activity_count", "activity_1.create-eot.c3.txt"},
      {"tr_party_count", "party_people.create-eot.c3.txt"},
  };
  std::vector<PreparedExemplar> exemplars;
  for (const auto& [id, _] : picks)
    exemplars.push_back({pool_index(id), pool20().examples()[pool_index(id)].gold_sql});

  PromptBundle bundle =
      build_prompt(testsupport::catalog().db("concert_singer"), "How many singers do we have?",
                   exemplars, pool20(), testsupport::catalog(), config, workspace_rows());

  REQUIRE(bundle.messages.size() == 2 * picks.size() + 2);
  CHECK(bundle.messages[0] == ChatMessage{Role::system, kSystemInstruction});
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const Example& e = pool20().examples()[pool_index(picks[k].first)];
    CHECK(bundle.messages[1 + 2 * k] == ChatMessage{Role::user, user_turn(picks[k].second, e.question)});
    CHECK(bundle.messages[2 + 2 * k] == ChatMessage{Role::assistant, e.gold_sql});
  }
  CHECK(bundle.messages.back() ==
        ChatMessage{Role::user, user_turn("concert_singer.create-eot.c3.txt",
                                          "How many singers do we have?")});
  CHECK(bundle.exemplars == std::vector<std::size_t>{pool_index("tr_sav_top3"),
                                                     pool_index("tr_least_dest"),
                                                     pool_index("tr_activity_count"),
                                                     pool_index("tr_party_count")});
}

TEST_CASE("reasoning prompt carries annotated answers verbatim") {
  testsupport::PinnedSimilarity sim;
  PipelineConfig config;
  config.mode = PromptMode::act_sql;
  config.style = DbStyle::create_eot;

  std::vector<std::pair<std::string, std::string>> picks = {
      {"tr_sav_top3", "cot_top_savings.txt"},
      {"tr_least_dest", "cot_least_flights.txt"},
      {"tr_dorm_has_amen", "cot_dorm_amenity_count.txt"},
      {"tr_amen_kinds", "cot_amenity_kinds.txt"},
  };
  std::vector<PreparedExemplar> exemplars;
  for (const auto& [id, cot] : picks) {
    const Example& e = pool20().examples()[pool_index(id)];
    CotAnnotation ann = annotate(e, testsupport::catalog().db(e.db_id), sim, config.link);
    CHECK(ann.text == golden(cot));
    exemplars.push_back({pool_index(id), ann.text});
  }

  PromptBundle bundle =
      build_prompt(testsupport::catalog().db("concert_singer"), "How many singers do we have?",
                   exemplars, pool20(), testsupport::catalog(), config, workspace_rows());
  REQUIRE(bundle.messages.size() == 10);
  for (std::size_t k = 0; k < picks.size(); ++k)
    CHECK(bundle.messages[2 + 2 * k] == ChatMessage{Role::assistant, golden(picks[k].second)});
}

TEST_CASE("SQL extraction against the recorded reply table") {
  std::ifstream in(testsupport::fixture_path("extraction_cases.json"));
  REQUIRE(in.good());
  nlohmann::json cases;
  in >> cases;
  REQUIRE(cases.size() >= 10);

  for (const auto& c : cases) {
    CAPTURE(c.at("reply").get<std::string>());
    PromptMode mode = *prompt_mode_from(c.at("mode").get<std::string>());
    Extraction got = extract_sql(c.at("reply").get<std::string>(), mode);
    CHECK(got.sql == c.at("sql").get<std::string>());
    CHECK(extraction_status_name(got.status) == c.at("status").get<std::string>());
  }
}

TEST_CASE("extraction inverts annotation for every pool example") {
  testsupport::PinnedSimilarity sim;
  LinkOptions link;
  for (const auto& e : testsupport::train_examples()) {
    CotAnnotation ann = annotate(e, testsupport::catalog().db(e.db_id), sim, link);
    Extraction got = extract_sql(ann.text, PromptMode::act_sql);
    CHECK(got.status == ExtractionStatus::marker);
    CHECK(got.sql == ann.final_sql);
  }
}

TEST_CASE("predict makes exactly one gateway call per example") {
  auto backend = std::make_shared<testsupport::StubBackend>(testsupport::ideal_responder());
  LlmGateway gateway(backend, CacheMode::live);
  testsupport::PinnedSimilarity sim;

  PipelineConfig config;  // act_sql, 2 static + 2 dynamic
  GenerationParams params = GenerationParams::reasoning();

  const Example& probe = example_by_id(testsupport::test_examples(), "te_singer_count");
  Prediction pred = predict(probe, pool20(), testsupport::catalog(), config, workspace_rows(),
                            sim, gateway, params);
  CHECK(backend->calls() == 1);
  CHECK(pred.source_id == "te_singer_count");
  CHECK(pred.status == ExtractionStatus::marker);
  CHECK(pred.sql == probe.gold_sql);
  CHECK(pred.raw_reply.find(kAnswerMarker) != std::string::npos);
}

TEST_CASE("batch prediction keeps input order across worker threads") {
  auto backend = std::make_shared<testsupport::StubBackend>(testsupport::ideal_responder());
  LlmGateway gateway(backend, CacheMode::live);
  testsupport::PinnedSimilarity sim;

  PipelineConfig config;
  GenerationParams params = GenerationParams::reasoning();

  auto preds = predict_batch(testsupport::test_examples(), pool20(), testsupport::catalog(),
                             config, workspace_rows(), sim, gateway, params, 4);
  REQUIRE(preds.size() == testsupport::test_examples().size());
  CHECK(backend->calls() == static_cast<int>(preds.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].source_id == testsupport::test_examples()[i].source_id);
    CHECK(preds[i].sql == testsupport::test_examples()[i].gold_sql);
  }
}

TEST_CASE("exemplars with unusable gold SQL are replaced from the same ranking") {
  LexicalTrigramSimilarity sim;
  std::vector<Example> examples;
  Example broken;
  broken.source_id = "p0";
  broken.db_id = "concert_singer";
  broken.question = "how many singers are there ?";
  broken.question_tokens = tokenize_question(broken.question);
  broken.gold_sql = "this is not SQL at all";
  examples.push_back(broken);
  examples.push_back(example_by_id(testsupport::train_examples(), "tr_concert_counts"));
  examples.push_back(example_by_id(testsupport::train_examples(), "tr_max_capacity"));
  ExemplarPool pool(examples, sim);

  PipelineConfig config;
  config.mode = PromptMode::act_sql;
  config.selection.n_static = 0;
  config.selection.n_dynamic = 2;

  std::vector<ChatMessage> seen;
  auto backend = std::make_shared<testsupport::StubBackend>(
      [&](const std::vector<ChatMessage>& messages, const GenerationParams&) {
        seen = messages;
        return LlmReply{"So the final answer is:\nSELECT count(*) FROM singer", "stop", {}};
      });
  LlmGateway gateway(backend, CacheMode::live);

  Example probe;
  probe.source_id = "probe";
  probe.db_id = "concert_singer";
  probe.question = "how many singers are there ?";
  probe.question_tokens = tokenize_question(probe.question);
  probe.gold_sql = "SELECT count(*) FROM singer";

  predict(probe, pool, testsupport::catalog(), config, nullptr, sim, gateway,
          GenerationParams::reasoning());
  REQUIRE(seen.size() == 6);
  // The lexically closest pool entry has unusable gold SQL, so the two
  // assistant turns must come from the other entries.
  for (std::size_t i : {2u, 4u}) {
    CHECK(seen[i].role == Role::assistant);
    CHECK(seen[i].content.find("not SQL") == std::string::npos);
  }

  config.selection.n_dynamic = 3;
  CHECK_THROWS_AS(predict(probe, pool, testsupport::catalog(), config, nullptr, sim, gateway,
                          GenerationParams::reasoning()),
                  PoolTooSmallError);
}

TEST_CASE("rewrite exemplar files load and validate") {
  auto sparc = load_rewrite_exemplars(testsupport::resources_root() + "/rewrite/sparc_exemplars.json");
  REQUIRE(sparc.size() == 10);
  CHECK(sparc[0].original.size() == 3);
  CHECK(sparc[0].rewritten[1] == "What are the flights that depart from Aberdeen and land in Ashley?");
  auto cosql = load_rewrite_exemplars(testsupport::resources_root() + "/rewrite/cosql_exemplars.json");
  CHECK(cosql.size() == 10);

  testsupport::TempDir tmp("rewrite");
  CHECK_THROWS_AS(load_rewrite_exemplars(tmp.file("absent.json")), MissingFileError);

  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(tmp.file(name));
    out << body;
  };
  write("object.json", "{}");
  CHECK_THROWS_AS(load_rewrite_exemplars(tmp.file("object.json")), MalformedDocumentError);
  write("empty.json", "[]");
  CHECK_THROWS_AS(load_rewrite_exemplars(tmp.file("empty.json")), MalformedDocumentError);
  write("skew.json", R"([{"original": ["a", "b"], "rewritten": ["a"]}])");
  CHECK_THROWS_AS(load_rewrite_exemplars(tmp.file("skew.json")), MalformedDocumentError);
  write("missing.json", R"([{"original": ["a"]}])");
  CHECK_THROWS_AS(load_rewrite_exemplars(tmp.file("missing.json")), MalformedDocumentError);
}

TEST_CASE("interaction rewriting prompts with numbered lists and parses the reply") {
  auto interactions = load_interactions(testsupport::fixture_path("interactions.json"));
  REQUIRE(interactions.size() == 2);
  const Interaction& aberdeen = interactions[0];
  auto exemplars = load_rewrite_exemplars(testsupport::resources_root() + "/rewrite/sparc_exemplars.json");

  std::vector<ChatMessage> seen;
  auto backend = std::make_shared<testsupport::StubBackend>(
      [&](const std::vector<ChatMessage>& messages, const GenerationParams&) {
        seen = messages;
        return LlmReply{"1. What are all the flights that depart from Aberdeen?\n"
                        "2. What are the flights that depart from Aberdeen and land in Ashley?\n"
                        "3. How many flights depart from Aberdeen and land in Ashley?",
                        "stop", {}};
      });
  LlmGateway gateway(backend, CacheMode::live);

  RewriteOutcome outcome =
      rewrite_interaction(aberdeen, exemplars, gateway, GenerationParams::plain());

  REQUIRE(seen.size() == 1 + 2 * exemplars.size() + 1);
  CHECK(seen[0] == ChatMessage{Role::system, kRewriteInstruction});
  CHECK(seen[1] == ChatMessage{Role::user,
                               "1. What are all the flights that leave from Aberdeen?\n"
                               "2. Of those, which land in Ashley?\n"
                               "3. How many are there?"});
  CHECK(seen[2].role == Role::assistant);
  CHECK(seen.back().role == Role::user);
  CHECK(seen.back().content ==
        "1. What are all the flights that leave from Aberdeen?\n"
        "2. Of those, which land in Ashley?\n"
        "3. How many are there?");

  REQUIRE(outcome.examples.size() == 3);
  CHECK_FALSE(outcome.parse_failed);
  CHECK(outcome.fallback_turns == 0);
  CHECK(outcome.examples[0].question == "What are all the flights that depart from Aberdeen?");
  CHECK(outcome.examples[1].question ==
        "What are the flights that depart from Aberdeen and land in Ashley?");
  CHECK(outcome.examples[2].question == "How many flights depart from Aberdeen and land in Ashley?");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(outcome.examples[i].source_id == "aberdeen_flights#" + std::to_string(i));
    CHECK(outcome.examples[i].db_id == "flight_2");
    CHECK(outcome.examples[i].gold_sql == aberdeen.turns[i].gold_sql);
  }
}

TEST_CASE("rewrite replies with missing or absent list entries fall back") {
  auto interactions = load_interactions(testsupport::fixture_path("interactions.json"));
  const Interaction& aberdeen = interactions[0];
  std::vector<RewriteExemplar> exemplars = {{{"a"}, {"a"}}};

  auto run = [&](const std::string& reply) {
    auto backend = std::make_shared<testsupport::StubBackend>(testsupport::fixed_responder(reply));
    LlmGateway gateway(backend, CacheMode::live);
    return rewrite_interaction(aberdeen, exemplars, gateway, GenerationParams::plain());
  };

  RewriteOutcome partial = run("1. Rewritten first question");
  CHECK_FALSE(partial.parse_failed);
  CHECK(partial.fallback_turns == 2);
  CHECK(partial.examples[0].question == "Rewritten first question");
  CHECK(partial.examples[1].question == aberdeen.turns[1].question);
  CHECK(partial.examples[2].question == aberdeen.turns[2].question);

  RewriteOutcome broken = run("I cannot help with that.");
  CHECK(broken.parse_failed);
  CHECK(broken.fallback_turns == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(broken.examples[i].question == aberdeen.turns[i].question);

  RewriteOutcome parens = run("1) A\n2) B\nnoise in between\n3) C");
  CHECK(parens.fallback_turns == 0);
  CHECK(parens.examples[2].question == "C");
}
