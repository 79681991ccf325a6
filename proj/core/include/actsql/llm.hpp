#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace actsql {

enum class Role { system, user, assistant };
const char* role_name(Role r);
std::optional<Role> role_from(const std::string& name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct GenerationParams {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 150;

  static GenerationParams plain(std::string model = "gpt-3.5-turbo") {
    return GenerationParams{std::move(model), 0.0, 150};
  }
  static GenerationParams reasoning(std::string model = "gpt-3.5-turbo") {
    return GenerationParams{std::move(model), 0.0, 750};
  }
};

struct Usage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct LlmReply {
  std::string content;
  std::string finish_reason;
  std::optional<Usage> usage;
};

// Transport that produces one completion for one chat. Implementations other
// than the HTTP one exist for tests (stubs, counters).
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual LlmReply complete(const std::vector<ChatMessage>& messages,
                            const GenerationParams& params) = 0;
};

// POSTs <api_base>/chat/completions with the standard chat-completions JSON
// body. Transient failures (connection errors, timeouts, HTTP 408/429/5xx)
// are retried with exponential backoff and jitter.
class HttpChatBackend final : public ChatBackend {
 public:
  struct Options {
    int max_attempts = 5;
    std::chrono::milliseconds backoff_base{1000};
    std::chrono::seconds read_timeout{120};
  };

  HttpChatBackend(std::string api_base, std::string api_key);
  HttpChatBackend(std::string api_base, std::string api_key, Options options);
  LlmReply complete(const std::vector<ChatMessage>& messages,
                    const GenerationParams& params) override;

 private:
  std::string api_base_;
  std::string api_key_;
  Options options_;
};

enum class CacheMode { live, record, replay_strict };
std::optional<CacheMode> cache_mode_from(const std::string& name);
const char* cache_mode_name(CacheMode m);

// Stable identity of one request: a content hash over the model, sampling
// params and the ordered (role, content) pairs. Hex-encoded.
std::string request_key(const std::vector<ChatMessage>& messages,
                        const GenerationParams& params);

// Front door for completions. live forwards every call to the backend;
// record forwards on cache miss and appends the reply to the cache file;
// replay_strict serves from the cache only and fails loudly on a miss.
// Cache files are JSON lines, append-only; on load the last record for a key
// wins. Thread-safe; at most `max_inflight` backend calls run at once.
class LlmGateway {
 public:
  struct Options {
    int max_inflight = 4;
  };

  LlmGateway(std::shared_ptr<ChatBackend> backend, CacheMode mode,
             std::string cache_path = "");
  LlmGateway(std::shared_ptr<ChatBackend> backend, CacheMode mode, std::string cache_path,
             Options options);

  LlmReply complete_chat(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params);

  CacheMode mode() const { return mode_; }
  const std::string& cache_path() const { return cache_path_; }

 private:
  LlmReply call_backend(const std::vector<ChatMessage>& messages,
                        const GenerationParams& params);
  void append_record(const std::string& key, const std::vector<ChatMessage>& messages,
                     const GenerationParams& params, const LlmReply& reply);

  std::shared_ptr<ChatBackend> backend_;
  CacheMode mode_;
  std::string cache_path_;
  Options options_;

  std::mutex cache_mu_;
  std::unordered_map<std::string, LlmReply> cache_;

  std::mutex slots_mu_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;
};

}  // namespace actsql
