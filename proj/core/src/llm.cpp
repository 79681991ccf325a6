#include "actsql/llm.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "hash.hpp"

namespace actsql {

using nlohmann::json;

const char* role_name(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> role_from(const std::string& name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  return std::nullopt;
}

std::optional<CacheMode> cache_mode_from(const std::string& name) {
  if (name == "live") return CacheMode::live;
  if (name == "record") return CacheMode::record;
  if (name == "replay-strict" || name == "replay") return CacheMode::replay_strict;
  return std::nullopt;
}

const char* cache_mode_name(CacheMode m) {
  switch (m) {
    case CacheMode::live: return "live";
    case CacheMode::record: return "record";
    case CacheMode::replay_strict: return "replay-strict";
  }
  return "live";
}

namespace {

std::string render_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json reply_to_json(const LlmReply& reply) {
  json out;
  out["content"] = reply.content;
  out["finish_reason"] = reply.finish_reason;
  if (reply.usage) {
    out["usage"] = {{"prompt_tokens", reply.usage->prompt_tokens},
                    {"completion_tokens", reply.usage->completion_tokens}};
  } else {
    out["usage"] = nullptr;
  }
  return out;
}

LlmReply reply_from_json(const json& doc) {
  LlmReply reply;
  reply.content = doc.value("content", "");
  reply.finish_reason = doc.value("finish_reason", "");
  if (doc.contains("usage") && doc["usage"].is_object()) {
    Usage u;
    u.prompt_tokens = doc["usage"].value("prompt_tokens", 0LL);
    u.completion_tokens = doc["usage"].value("completion_tokens", 0LL);
    reply.usage = u;
  }
  return reply;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string request_key(const std::vector<ChatMessage>& messages,
                        const GenerationParams& params) {
  // Canonical byte layout, independent of any JSON serializer's key order.
  std::string blob = "v1\x1e";
  blob += params.model;
  blob += '\x1e';
  blob += render_double(params.temperature);
  blob += '\x1e';
  blob += std::to_string(params.max_tokens);
  blob += '\x1e';
  for (const auto& m : messages) {
    blob += role_name(m.role);
    blob += '\x1f';
    blob += m.content;
    blob += '\x1e';
  }
  return detail::sha256_hex(blob);
}

HttpChatBackend::HttpChatBackend(std::string api_base, std::string api_key)
    : HttpChatBackend(std::move(api_base), std::move(api_key), Options{}) {}

HttpChatBackend::HttpChatBackend(std::string api_base, std::string api_key, Options options)
    : api_base_(std::move(api_base)), api_key_(std::move(api_key)), options_(options) {}

LlmReply HttpChatBackend::complete(const std::vector<ChatMessage>& messages,
                                   const GenerationParams& params) {
  json body;
  body["model"] = params.model;
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  body["messages"] = json::array();
  for (const auto& m : messages)
    body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.content}});
  const std::string payload = body.dump();

  std::mt19937_64 jitter_rng(std::random_device{}());
  std::string last_error;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) {
      auto base = options_.backoff_base.count();
      long long delay = base << (attempt - 1);
      delay += static_cast<long long>(jitter_rng() % (base / 2 + 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }

    httplib::Client client(api_base_);
    client.set_read_timeout(options_.read_timeout.count(), 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post("/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "no response (" + httplib::to_string(res.error()) + ")";
      continue;  // connection failure or timeout: retry
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw ProviderError("chat completion failed: HTTP " + std::to_string(res->status) +
                          " body: " + res->body.substr(0, 200));

    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty())
      throw ProviderError("chat completion response malformed");
    const auto& choice = doc["choices"][0];
    LlmReply reply;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string())
      reply.content = choice["message"]["content"].get<std::string>();
    reply.finish_reason =
        choice.contains("finish_reason") && choice["finish_reason"].is_string()
            ? choice["finish_reason"].get<std::string>()
            : "";
    if (doc.contains("usage") && doc["usage"].is_object()) {
      Usage u;
      u.prompt_tokens = doc["usage"].value("prompt_tokens", 0LL);
      u.completion_tokens = doc["usage"].value("completion_tokens", 0LL);
      reply.usage = u;
    }
    return reply;
  }
  throw ProviderError("chat completion failed after " + std::to_string(options_.max_attempts) +
                      " attempts: " + last_error);
}

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, CacheMode mode,
                       std::string cache_path)
    : LlmGateway(std::move(backend), mode, std::move(cache_path), Options{}) {}

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, CacheMode mode,
                       std::string cache_path, Options options)
    : backend_(std::move(backend)), mode_(mode), cache_path_(std::move(cache_path)),
      options_(options) {
  if (options_.max_inflight < 1) throw ConfigInvariantError("max_inflight must be >= 1");
  if (mode_ != CacheMode::live && cache_path_.empty())
    throw ConfigInvariantError("record/replay modes need a cache path");
  if (mode_ != CacheMode::live) {
    std::ifstream in(cache_path_);
    if (!in && mode_ == CacheMode::replay_strict)
      throw MissingFileError("cannot open replay cache '" + cache_path_ + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json doc = json::parse(line, nullptr, false);
      if (doc.is_discarded() || !doc.contains("key") || !doc["key"].is_string())
        throw MalformedDocumentError(cache_path_ + ":" + std::to_string(lineno) +
                                     ": bad cache record");
      // Append-only log: a later record for the same key replaces the earlier.
      cache_[doc["key"].get<std::string>()] = reply_from_json(doc.value("reply", json::object()));
    }
  }
}

LlmReply LlmGateway::call_backend(const std::vector<ChatMessage>& messages,
                                  const GenerationParams& params) {
  if (!backend_) throw ProviderError("no backend configured for live requests");
  {
    std::unique_lock<std::mutex> lock(slots_mu_);
    slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_inflight; });
    ++in_flight_;
  }
  LlmReply reply;
  try {
    reply = backend_->complete(messages, params);
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(slots_mu_);
      --in_flight_;
    }
    slots_cv_.notify_one();
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(slots_mu_);
    --in_flight_;
  }
  slots_cv_.notify_one();
  return reply;
}

void LlmGateway::append_record(const std::string& key,
                               const std::vector<ChatMessage>& messages,
                               const GenerationParams& params, const LlmReply& reply) {
  json rec;
  rec["key"] = key;
  rec["model"] = params.model;
  rec["params"] = {{"temperature", params.temperature}, {"max_tokens", params.max_tokens}};
  rec["messages"] = json::array();
  for (const auto& m : messages)
    rec["messages"].push_back({{"role", role_name(m.role)}, {"content", m.content}});
  rec["reply"] = reply_to_json(reply);
  rec["timestamp"] = iso_timestamp();

  std::ofstream out(cache_path_, std::ios::app);
  if (!out) throw MissingFileError("cannot append to cache '" + cache_path_ + "'");
  out << rec.dump() << "\n";
}

LlmReply LlmGateway::complete_chat(const std::vector<ChatMessage>& messages,
                                   const GenerationParams& params) {
  const std::string key = request_key(messages, params);
  if (mode_ != CacheMode::live) {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (mode_ == CacheMode::replay_strict)
      throw CacheMissError("no cached reply for request key " + key);
  }
  LlmReply reply = call_backend(messages, params);
  if (mode_ == CacheMode::record) {
    std::lock_guard<std::mutex> lock(cache_mu_);
    cache_[key] = reply;
    append_record(key, messages, params, reply);
  }
  return reply;
}

}  // namespace actsql
