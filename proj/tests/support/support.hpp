#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "actsql/dataset.hpp"
#include "actsql/llm.hpp"
#include "actsql/schema.hpp"
#include "actsql/similarity.hpp"

namespace testsupport {

// Paths handed in by the test runner.
std::string fixtures_root();
std::string resources_root();
std::string cli_path();

std::string read_file(const std::string& path);
// Golden files are stored with a single trailing newline; this strips it.
std::string golden(const std::string& name);
std::string fixture_path(const std::string& name);

// Temp directory removed when the object goes out of scope.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

// SQLite databases built from the checked-in scripts, shared per process.
// Layout: <root>/db/<id>/<id>.sqlite plus <root>/variants/concert_singer/.
class Workspace {
 public:
  static const Workspace& instance();
  const std::string& db_root() const { return db_root_; }
  const std::string& variants_root() const { return variants_root_; }

 private:
  Workspace();
  std::unique_ptr<TempDir> dir_;
  std::string db_root_;
  std::string variants_root_;
};

const actsql::SchemaCatalog& catalog();
const std::vector<actsql::Example>& train_examples();
const std::vector<actsql::Example>& test_examples();

// Similarity provider that forces chosen (target, slice) pairs to win while
// everything else falls back to a damped lexical score. Lookups ignore case.
class PinnedSimilarity final : public actsql::SimilarityProvider {
 public:
  PinnedSimilarity();  // pins for the reasoning golden files
  explicit PinnedSimilarity(std::map<std::string, std::string> pins);
  double similarity(const std::string& a, const std::string& b) const override;

 private:
  std::map<std::string, std::string> pins_;  // lowercased target -> slice
  actsql::LexicalTrigramSimilarity lexical_;
};

// Backend driven by a handler function; counts calls.
class StubBackend final : public actsql::ChatBackend {
 public:
  using Handler = std::function<actsql::LlmReply(const std::vector<actsql::ChatMessage>&,
                                                 const actsql::GenerationParams&)>;
  explicit StubBackend(Handler handler) : handler_(std::move(handler)) {}
  actsql::LlmReply complete(const std::vector<actsql::ChatMessage>& messages,
                            const actsql::GenerationParams& params) override;
  int calls() const { return calls_.load(); }

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
};

// Returns a reasoning reply ending in the gold SQL of whichever fixture
// question appears in the final user message.
StubBackend::Handler ideal_responder();

// Fixed reply regardless of input.
StubBackend::Handler fixed_responder(std::string reply);

// Tracks the maximum number of concurrent calls the gateway lets through.
class ConcurrencyProbeBackend final : public actsql::ChatBackend {
 public:
  actsql::LlmReply complete(const std::vector<actsql::ChatMessage>& messages,
                            const actsql::GenerationParams& params) override;
  int max_seen() const { return max_seen_.load(); }

 private:
  std::atomic<int> current_{0};
  std::atomic<int> max_seen_{0};
};

// Minimal chat-completions HTTP server for transport tests. `behavior` maps
// the request count (1-based) to a response; default serves the handler.
class StubChatServer {
 public:
  explicit StubChatServer(StubBackend::Handler handler);
  ~StubChatServer();
  StubChatServer(const StubChatServer&) = delete;
  StubChatServer& operator=(const StubChatServer&) = delete;

  std::string base_url() const;  // http://127.0.0.1:<port>/v1
  int hits() const { return hits_.load(); }
  // Next `n` requests answer with this HTTP status and empty body.
  void fail_next(int n, int status);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> hits_{0};
};

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

// Runs the installed CLI binary with `args` appended; extra_env entries are
// KEY=VALUE pairs exported for the child.
CliResult run_cli(const std::string& args, const std::vector<std::string>& extra_env = {});

}  // namespace testsupport
