#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace actsql {

// Scores how closely two short texts relate. Implementations must be
// deterministic for fixed inputs and safe to call from multiple threads.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double similarity(const std::string& a, const std::string& b) const = 0;
  // Optional warm-up hook for providers that benefit from batching.
  virtual void prime(const std::vector<std::string>& texts) const { (void)texts; }
};

// Default offline provider: cosine similarity over character trigram counts
// of the lowercased, underscore-to-space texts. Strings shorter than three
// characters contribute themselves as a single gram.
class LexicalTrigramSimilarity final : public SimilarityProvider {
 public:
  double similarity(const std::string& a, const std::string& b) const override;

  using Profile = std::map<std::string, int>;
  static Profile profile(const std::string& s);
  static double cosine(const Profile& a, const Profile& b);
};

// Network-backed provider speaking the common embeddings endpoint shape:
// POST <base>/embeddings with {"model": ..., "input": [texts]} returning
// {"data": [{"embedding": [...]}, ...]}. Vectors are cached per text.
class HttpEmbeddingSimilarity final : public SimilarityProvider {
 public:
  HttpEmbeddingSimilarity(std::string api_base, std::string model,
                          std::string api_key = "");
  double similarity(const std::string& a, const std::string& b) const override;
  void prime(const std::vector<std::string>& texts) const override;

 private:
  std::vector<double> embed(const std::string& text) const;
  void fetch(const std::vector<std::string>& texts) const;

  std::string api_base_;
  std::string model_;
  std::string api_key_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

}  // namespace actsql
