#include <doctest.h>

#include <fstream>
#include <memory>
#include <thread>
#include <vector>

#include "actsql/errors.hpp"
#include "actsql/llm.hpp"
#include "support.hpp"

using namespace actsql;

namespace {

std::vector<ChatMessage> probe_messages() {
  return {{Role::system, "You are a helpful assistant."},
          {Role::user, "Question: How many singers do we have?"}};
}

}  // namespace

TEST_CASE("role and cache mode names round-trip") {
  for (Role r : {Role::system, Role::user, Role::assistant})
    CHECK(role_from(role_name(r)) == r);
  CHECK_FALSE(role_from("tool").has_value());

  for (CacheMode m : {CacheMode::live, CacheMode::record, CacheMode::replay_strict})
    CHECK(cache_mode_from(cache_mode_name(m)) == m);
  CHECK(cache_mode_from("replay") == CacheMode::replay_strict);
  CHECK_FALSE(cache_mode_from("offline").has_value());
}

TEST_CASE("generation parameter presets") {
  GenerationParams plain = GenerationParams::plain();
  CHECK(plain.model == "gpt-3.5-turbo");
  CHECK(plain.temperature == 0.0);
  CHECK(plain.max_tokens == 150);
  CHECK(GenerationParams::reasoning().max_tokens == 750);
  CHECK(GenerationParams::reasoning("other").model == "other");
}

TEST_CASE("request keys are frozen and sensitive to every field") {
  GenerationParams params = GenerationParams::reasoning();
  const std::string key = request_key(probe_messages(), params);
  // Frozen value, recomputed independently from the documented byte layout.
  CHECK(key == "d7b91b12a9793f85ec2cb96b8ebb43b188afef5939b5efb06ab61501cae464c4");
  CHECK(request_key(probe_messages(), params) == key);

  GenerationParams other = params;
  other.model = "gpt-4";
  CHECK(request_key(probe_messages(), other) != key);
  other = params;
  other.temperature = 0.5;
  CHECK(request_key(probe_messages(), other) != key);
  other = params;
  other.max_tokens = 151;
  CHECK(request_key(probe_messages(), other) != key);

  auto messages = probe_messages();
  messages[1].content += "?";
  CHECK(request_key(messages, params) != key);
  messages = probe_messages();
  messages[1].role = Role::assistant;
  CHECK(request_key(messages, params) != key);
  messages = probe_messages();
  std::swap(messages[0], messages[1]);
  CHECK(request_key(messages, params) != key);
}

TEST_CASE("record then replay round-trips through the cache file") {
  testsupport::TempDir tmp("cache");
  const std::string cache = tmp.file("replies.ndjson");
  GenerationParams params = GenerationParams::plain();

  std::vector<ChatMessage> first = {{Role::user, "one"}};
  std::vector<ChatMessage> second = {{Role::user, "two"}};

  auto backend = std::make_shared<testsupport::StubBackend>(testsupport::fixed_responder("alpha"));
  {
    LlmGateway gateway(backend, CacheMode::record, cache);
    CHECK(gateway.mode() == CacheMode::record);
    CHECK(gateway.cache_path() == cache);
    CHECK(gateway.complete_chat(first, params).content == "alpha");
    CHECK(gateway.complete_chat(second, params).content == "alpha");
    // A repeated request is served from the in-memory cache.
    CHECK(gateway.complete_chat(first, params).content == "alpha");
    CHECK(backend->calls() == 2);
  }

  // Replay needs no backend at all.
  LlmGateway replay(nullptr, CacheMode::replay_strict, cache);
  CHECK(replay.complete_chat(first, params).content == "alpha");
  CHECK(replay.complete_chat(second, params).content == "alpha");
  CHECK_THROWS_AS(replay.complete_chat({{Role::user, "three"}}, params), CacheMissError);
}

TEST_CASE("a fresh recording run resumes from the existing cache") {
  testsupport::TempDir tmp("cache");
  const std::string cache = tmp.file("replies.ndjson");
  GenerationParams params = GenerationParams::plain();
  std::vector<ChatMessage> first = {{Role::user, "one"}};

  {
    auto backend =
        std::make_shared<testsupport::StubBackend>(testsupport::fixed_responder("alpha"));
    LlmGateway gateway(backend, CacheMode::record, cache);
    gateway.complete_chat(first, params);
  }

  auto backend = std::make_shared<testsupport::StubBackend>(testsupport::fixed_responder("beta"));
  LlmGateway resumed(backend, CacheMode::record, cache);
  CHECK(resumed.complete_chat(first, params).content == "alpha");
  CHECK(backend->calls() == 0);
  CHECK(resumed.complete_chat({{Role::user, "two"}}, params).content == "beta");
  CHECK(backend->calls() == 1);
}

TEST_CASE("the last cache record for a key wins") {
  testsupport::TempDir tmp("cache");
  const std::string cache = tmp.file("replies.ndjson");
  GenerationParams params = GenerationParams::plain();
  std::vector<ChatMessage> first = {{Role::user, "one"}};
  const std::string key = request_key(first, params);

  {
    std::ofstream out(cache);
    out << R"({"key": ")" << key << R"(", "reply": {"content": "stale", "finish_reason": "stop"}})"
        << "\n";
    out << "\n";
    out << R"({"key": ")" << key << R"(", "reply": {"content": "fresh", "finish_reason": "stop"}})"
        << "\n";
  }
  LlmGateway replay(nullptr, CacheMode::replay_strict, cache);
  CHECK(replay.complete_chat(first, params).content == "fresh");

  {
    std::ofstream out(cache, std::ios::app);
    out << "not json\n";
  }
  CHECK_THROWS_AS(LlmGateway(nullptr, CacheMode::replay_strict, cache), MalformedDocumentError);
}

TEST_CASE("gateway configuration is validated up front") {
  testsupport::TempDir tmp("cache");
  auto backend = std::make_shared<testsupport::StubBackend>(testsupport::fixed_responder("x"));
  CHECK_THROWS_AS(LlmGateway(backend, CacheMode::record, ""), ConfigInvariantError);
  CHECK_THROWS_AS(LlmGateway(backend, CacheMode::replay_strict, tmp.file("absent.ndjson")),
                  MissingFileError);
  LlmGateway::Options options;
  options.max_inflight = 0;
  CHECK_THROWS_AS(LlmGateway(backend, CacheMode::live, "", options), ConfigInvariantError);
}

TEST_CASE("transient HTTP failures are retried, permanent ones are not") {
  testsupport::StubChatServer server(testsupport::fixed_responder("pong"));
  HttpChatBackend::Options options;
  options.max_attempts = 4;
  options.backoff_base = std::chrono::milliseconds(5);

  HttpChatBackend backend(server.base_url(), "test-key", options);
  GenerationParams params = GenerationParams::plain();
  std::vector<ChatMessage> messages = {{Role::user, "ping"}};

  LlmReply reply = backend.complete(messages, params);
  CHECK(reply.content == "pong");
  CHECK(reply.finish_reason == "stop");
  REQUIRE(reply.usage.has_value());
  CHECK(reply.usage->prompt_tokens == 1);
  int base = server.hits();
  CHECK(base == 1);

  server.fail_next(2, 503);
  CHECK(backend.complete(messages, params).content == "pong");
  CHECK(server.hits() == base + 3);

  server.fail_next(1, 429);
  CHECK(backend.complete(messages, params).content == "pong");
  CHECK(server.hits() == base + 5);

  server.fail_next(1, 404);
  CHECK_THROWS_AS(backend.complete(messages, params), ProviderError);
  CHECK(server.hits() == base + 6);

  HttpChatBackend::Options tight = options;
  tight.max_attempts = 2;
  HttpChatBackend impatient(server.base_url(), "test-key", tight);
  server.fail_next(5, 500);
  CHECK_THROWS_AS(impatient.complete(messages, params), ProviderError);
  CHECK(server.hits() == base + 8);
  server.fail_next(0, 200);
}

TEST_CASE("gateway caps the number of concurrent backend calls") {
  auto probe = std::make_shared<testsupport::ConcurrencyProbeBackend>();
  LlmGateway::Options options;
  options.max_inflight = 2;
  LlmGateway gateway(probe, CacheMode::live, "", options);
  GenerationParams params = GenerationParams::plain();

  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      std::vector<ChatMessage> messages = {{Role::user, "q" + std::to_string(i)}};
      gateway.complete_chat(messages, params);
    });
  }
  for (auto& t : threads) t.join();
  CHECK(probe->max_seen() <= 2);
  CHECK(probe->max_seen() >= 1);
}
