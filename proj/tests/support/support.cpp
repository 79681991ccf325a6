#include "support.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "actsql/sqlite_db.hpp"
#include "actsql/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace testsupport {

namespace {

std::string require_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw std::runtime_error(std::string("environment variable not set: ") + name);
  return v;
}

}  // namespace

std::string fixtures_root() { return require_env("ACTSQL_FIXTURES"); }
std::string resources_root() { return require_env("ACTSQL_RESOURCES"); }
std::string cli_path() { return require_env("ACTSQL_BIN"); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) {
  std::string body = read_file(fixtures_root() + "/golden/" + name);
  if (!body.empty() && body.back() == '\n') body.pop_back();
  return body;
}

std::string fixture_path(const std::string& name) { return fixtures_root() + "/" + name; }

TempDir::TempDir(const std::string& tag) {
  std::string tmpl = (fs::temp_directory_path() / (tag + ".XXXXXX")).string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed for " + tmpl);
  path_ = buf.data();
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Workspace::Workspace() : dir_(std::make_unique<TempDir>("actsql_ws")) {
  db_root_ = dir_->path() + "/db";
  variants_root_ = dir_->path() + "/variants";
  const std::string scripts = fixtures_root() + "/db";
  for (const auto& entry : fs::directory_iterator(scripts)) {
    if (entry.path().extension() != ".sql") continue;
    const std::string stem = entry.path().stem().string();
    std::string target;
    if (stem == "concert_singer_variant") {
      fs::create_directories(variants_root_ + "/concert_singer");
      target = variants_root_ + "/concert_singer/v1.sqlite";
    } else {
      fs::create_directories(db_root_ + "/" + stem);
      target = db_root_ + "/" + stem + "/" + stem + ".sqlite";
    }
    actsql::SqliteDb db(target, actsql::SqliteDb::OpenMode::read_write_create);
    db.exec(read_file(entry.path().string()));
  }
}

const Workspace& Workspace::instance() {
  static Workspace ws;
  return ws;
}

const actsql::SchemaCatalog& catalog() {
  static actsql::SchemaCatalog cat = actsql::load_schema_catalog(fixture_path("tables.json"));
  return cat;
}

const std::vector<actsql::Example>& train_examples() {
  static std::vector<actsql::Example> v = actsql::load_examples(fixture_path("train20.json"));
  return v;
}

const std::vector<actsql::Example>& test_examples() {
  static std::vector<actsql::Example> v = actsql::load_examples(fixture_path("test10.json"));
  return v;
}

PinnedSimilarity::PinnedSimilarity()
    : PinnedSimilarity(std::map<std::string, std::string>{
          {"savings balance", "savings balance"},
          {"accounts name", "accounts"},
          {"flight destination", "flights"},
          {"has amenity dormid", "dorms have amenities ?"},
          {"dorm amenity", "dorm amenities are there ?"},
          {"tv channel hight definition tv", "tv channel that has high definition tv"},
          {"tv channel package option", "package choice and series name"},
          {"tv channel series name", "package choice and series name"},
      }) {}

PinnedSimilarity::PinnedSimilarity(std::map<std::string, std::string> pins)
    : pins_(std::move(pins)) {}

double PinnedSimilarity::similarity(const std::string& a, const std::string& b) const {
  auto it = pins_.find(actsql::text::to_lower(a));
  if (it != pins_.end() && actsql::text::to_lower(b) == it->second) return 1.0;
  return 0.5 * lexical_.similarity(a, b);
}

actsql::LlmReply StubBackend::complete(const std::vector<actsql::ChatMessage>& messages,
                                       const actsql::GenerationParams& params) {
  calls_.fetch_add(1);
  return handler_(messages, params);
}

StubBackend::Handler ideal_responder() {
  auto gold_by_question = std::make_shared<std::map<std::string, std::string>>();
  for (const auto& ex : train_examples()) (*gold_by_question)[ex.question] = ex.gold_sql;
  for (const auto& ex : test_examples()) (*gold_by_question)[ex.question] = ex.gold_sql;
  return [gold_by_question](const std::vector<actsql::ChatMessage>& messages,
                            const actsql::GenerationParams&) -> actsql::LlmReply {
    if (messages.empty()) throw std::runtime_error("ideal responder: empty prompt");
    const std::string& user = messages.back().content;
    const std::string tag = "Question: ";
    auto pos = user.rfind(tag);
    if (pos == std::string::npos)
      throw std::runtime_error("ideal responder: no question in final turn");
    std::string question = user.substr(pos + tag.size());
    auto it = gold_by_question->find(question);
    if (it == gold_by_question->end())
      throw std::runtime_error("ideal responder: unknown question '" + question + "'");
    actsql::LlmReply reply;
    reply.content = "Let's think step by step.\nSo the final answer is:\n" + it->second;
    reply.finish_reason = "stop";
    return reply;
  };
}

StubBackend::Handler fixed_responder(std::string reply) {
  return [reply = std::move(reply)](const std::vector<actsql::ChatMessage>&,
                                    const actsql::GenerationParams&) {
    return actsql::LlmReply{reply, "stop", std::nullopt};
  };
}

actsql::LlmReply ConcurrencyProbeBackend::complete(const std::vector<actsql::ChatMessage>&,
                                                   const actsql::GenerationParams&) {
  int now = current_.fetch_add(1) + 1;
  int seen = max_seen_.load();
  while (now > seen && !max_seen_.compare_exchange_weak(seen, now)) {
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  current_.fetch_sub(1);
  return {"So the final answer is:\nSELECT 1", "stop", std::nullopt};
}

struct StubChatServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  StubBackend::Handler handler;
  std::mutex mu;
  int fail_remaining = 0;
  int fail_status = 500;
};

StubChatServer::StubChatServer(StubBackend::Handler handler) : impl_(new Impl) {
  impl_->handler = std::move(handler);
  auto respond = [this](const httplib::Request& req, httplib::Response& res) {
    hits_.fetch_add(1);
    {
      std::lock_guard<std::mutex> lock(impl_->mu);
      if (impl_->fail_remaining > 0) {
        --impl_->fail_remaining;
        res.status = impl_->fail_status;
        return;
      }
    }
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      return;
    }
    std::vector<actsql::ChatMessage> messages;
    for (const auto& m : body["messages"]) {
      actsql::ChatMessage msg;
      auto role = actsql::role_from(m["role"].get<std::string>());
      msg.role = role ? *role : actsql::Role::user;
      msg.content = m["content"].get<std::string>();
      messages.push_back(std::move(msg));
    }
    actsql::GenerationParams params;
    if (body.contains("model")) params.model = body["model"].get<std::string>();
    if (body.contains("temperature")) params.temperature = body["temperature"].get<double>();
    if (body.contains("max_tokens")) params.max_tokens = body["max_tokens"].get<int>();
    actsql::LlmReply reply = impl_->handler(messages, params);
    json out = {
        {"choices",
         {{{"message", {{"role", "assistant"}, {"content", reply.content}}},
           {"finish_reason", reply.finish_reason}}}},
        {"usage", {{"prompt_tokens", 1}, {"completion_tokens", 1}}},
    };
    res.set_content(out.dump(), "application/json");
  };
  impl_->server.Post("/v1/chat/completions", respond);
  impl_->server.Post("/chat/completions", respond);
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw std::runtime_error("stub server could not bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubChatServer::~StubChatServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubChatServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1";
}

void StubChatServer::fail_next(int n, int status) {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->fail_remaining = n;
  impl_->fail_status = status;
}

CliResult run_cli(const std::string& args, const std::vector<std::string>& extra_env) {
  std::string cmd;
  for (const auto& kv : extra_env) cmd += "export " + kv + "; ";
  cmd += "exec " + cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  CliResult result;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testsupport
