#include "actsql/similarity.hpp"

#include <cmath>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "actsql/errors.hpp"
#include "actsql/text.hpp"

namespace actsql {

LexicalTrigramSimilarity::Profile LexicalTrigramSimilarity::profile(const std::string& s) {
  std::string norm = text::readable(s);
  Profile p;
  if (norm.empty()) return p;
  if (norm.size() < 3) {
    p[norm] = 1;
    return p;
  }
  for (std::size_t i = 0; i + 3 <= norm.size(); ++i) ++p[norm.substr(i, 3)];
  return p;
}

double LexicalTrigramSimilarity::cosine(const Profile& a, const Profile& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, n] : a) {
    na += static_cast<double>(n) * n;
    auto it = b.find(g);
    if (it != b.end()) dot += static_cast<double>(n) * it->second;
  }
  for (const auto& [g, n] : b) nb += static_cast<double>(n) * n;
  if (dot == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double LexicalTrigramSimilarity::similarity(const std::string& a, const std::string& b) const {
  return cosine(profile(a), profile(b));
}

HttpEmbeddingSimilarity::HttpEmbeddingSimilarity(std::string api_base, std::string model,
                                                 std::string api_key)
    : api_base_(std::move(api_base)), model_(std::move(model)), api_key_(std::move(api_key)) {}

void HttpEmbeddingSimilarity::fetch(const std::vector<std::string>& texts) const {
  std::vector<std::string> missing;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& t : texts)
      if (!cache_.count(t)) missing.push_back(t);
  }
  if (missing.empty()) return;

  nlohmann::json body;
  body["model"] = model_;
  body["input"] = missing;

  httplib::Client client(api_base_);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post("/embeddings", headers, body.dump(), "application/json");
  if (!res) throw ProviderError("embeddings request failed: no response");
  if (res->status != 200)
    throw ProviderError("embeddings request failed: HTTP " + std::to_string(res->status));
  auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array() ||
      doc["data"].size() != missing.size())
    throw ProviderError("embeddings response malformed");

  std::lock_guard<std::mutex> lock(mu_);
  for (std::size_t i = 0; i < missing.size(); ++i) {
    const auto& entry = doc["data"][i];
    if (!entry.contains("embedding") || !entry["embedding"].is_array())
      throw ProviderError("embeddings response malformed");
    std::vector<double> vec;
    vec.reserve(entry["embedding"].size());
    for (const auto& v : entry["embedding"]) vec.push_back(v.get<double>());
    cache_[missing[i]] = std::move(vec);
  }
}

std::vector<double> HttpEmbeddingSimilarity::embed(const std::string& t) const {
  fetch({t});
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.at(t);
}

void HttpEmbeddingSimilarity::prime(const std::vector<std::string>& texts) const {
  fetch(texts);
}

double HttpEmbeddingSimilarity::similarity(const std::string& a, const std::string& b) const {
  auto va = embed(a);
  auto vb = embed(b);
  if (va.size() != vb.size() || va.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace actsql
