#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actsql/dataset.hpp"
#include "actsql/similarity.hpp"

namespace actsql {

// A pool of candidate exemplars with their normalized question texts.
class ExemplarPool {
 public:
  ExemplarPool() = default;
  ExemplarPool(std::vector<Example> examples, const SimilarityProvider& sim);

  const std::vector<Example>& examples() const { return examples_; }
  const std::string& normalized_question(std::size_t i) const { return normalized_[i]; }
  std::size_t size() const { return examples_.size(); }

  // Stable content hash of the pool (db ids, questions, gold SQL), hex.
  std::string content_hash() const;

 private:
  std::vector<Example> examples_;
  std::vector<std::string> normalized_;
};

struct SelectionConfig {
  int n_static = 2;
  int n_dynamic = 2;
  std::uint64_t seed = 0;
};

// Seeded deterministic permutation of all pool indices; the static picks are
// its prefix and replacements continue down the same order.
std::vector<std::size_t> static_permutation(const ExemplarPool& pool, std::uint64_t seed);

// All pool indices ranked by descending similarity to `question`, ties
// broken by ascending pool index.
std::vector<std::size_t> dynamic_ranking(const ExemplarPool& pool, const std::string& question,
                                         const SimilarityProvider& sim);

// First n_static entries of the seeded permutation.
std::vector<std::size_t> select_static(const ExemplarPool& pool, int n_static,
                                       std::uint64_t seed);

// Top n_dynamic ranked entries, skipping `exclude` indices.
std::vector<std::size_t> select_dynamic(const ExemplarPool& pool, const std::string& question,
                                        int n_dynamic, const SimilarityProvider& sim,
                                        const std::vector<std::size_t>& exclude = {});

// Hybrid selection: static picks followed by dynamic picks, never
// overlapping. `exclude_source_id` keeps a pool entry from being selected as
// an exemplar for itself.
std::vector<std::size_t> select(const ExemplarPool& pool, const std::string& question,
                                const SelectionConfig& config, const SimilarityProvider& sim,
                                const std::string& exclude_source_id = "");

}  // namespace actsql
