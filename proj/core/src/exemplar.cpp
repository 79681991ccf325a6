#include "actsql/exemplar.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

#include "actsql/errors.hpp"
#include "hash.hpp"

namespace actsql {

ExemplarPool::ExemplarPool(std::vector<Example> examples, const SimilarityProvider& sim)
    : examples_(std::move(examples)) {
  normalized_.reserve(examples_.size());
  for (const auto& ex : examples_) normalized_.push_back(normalize_question(ex.question));
  sim.prime(normalized_);
}

std::string ExemplarPool::content_hash() const {
  std::string blob;
  for (const auto& ex : examples_) {
    blob += ex.db_id;
    blob += '\x1f';
    blob += ex.question;
    blob += '\x1f';
    blob += ex.gold_sql;
    blob += '\x1e';
  }
  return detail::sha256_hex(blob);
}

std::vector<std::size_t> static_permutation(const ExemplarPool& pool, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Fisher-Yates driven directly off the engine output; the standard library
  // distributions are not bit-stable across implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<std::size_t> dynamic_ranking(const ExemplarPool& pool, const std::string& question,
                                         const SimilarityProvider& sim) {
  std::string norm = normalize_question(question);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    scored.emplace_back(sim.similarity(norm, pool.normalized_question(i)), i);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& [_, i] : scored) out.push_back(i);
  return out;
}

std::vector<std::size_t> select_static(const ExemplarPool& pool, int n_static,
                                       std::uint64_t seed) {
  if (n_static < 0) throw ConfigInvariantError("n_static must be >= 0");
  if (static_cast<std::size_t>(n_static) > pool.size())
    throw PoolTooSmallError("pool holds " + std::to_string(pool.size()) +
                            " examples, need " + std::to_string(n_static));
  auto perm = static_permutation(pool, seed);
  perm.resize(static_cast<std::size_t>(n_static));
  return perm;
}

std::vector<std::size_t> select_dynamic(const ExemplarPool& pool, const std::string& question,
                                        int n_dynamic, const SimilarityProvider& sim,
                                        const std::vector<std::size_t>& exclude) {
  if (n_dynamic < 0) throw ConfigInvariantError("n_dynamic must be >= 0");
  std::unordered_set<std::size_t> skip(exclude.begin(), exclude.end());
  if (pool.size() - skip.size() < static_cast<std::size_t>(n_dynamic))
    throw PoolTooSmallError("pool has too few examples left for dynamic selection");
  std::vector<std::size_t> out;
  for (std::size_t i : dynamic_ranking(pool, question, sim)) {
    if (static_cast<int>(out.size()) == n_dynamic) break;
    if (skip.count(i)) continue;
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> select(const ExemplarPool& pool, const std::string& question,
                                const SelectionConfig& config, const SimilarityProvider& sim,
                                const std::string& exclude_source_id) {
  if (config.n_static < 0 || config.n_dynamic < 0)
    throw ConfigInvariantError("selection counts must be >= 0");
  if (pool.size() < static_cast<std::size_t>(config.n_static + config.n_dynamic))
    throw PoolTooSmallError("pool holds " + std::to_string(pool.size()) + " examples, need " +
                            std::to_string(config.n_static + config.n_dynamic));

  std::vector<std::size_t> self;
  if (!exclude_source_id.empty()) {
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool.examples()[i].source_id == exclude_source_id) self.push_back(i);
  }

  std::vector<std::size_t> picks;
  std::unordered_set<std::size_t> taken(self.begin(), self.end());
  for (std::size_t i : static_permutation(pool, config.seed)) {
    if (static_cast<int>(picks.size()) == config.n_static) break;
    if (taken.count(i)) continue;
    picks.push_back(i);
    taken.insert(i);
  }
  if (static_cast<int>(picks.size()) < config.n_static)
    throw PoolTooSmallError("pool has too few examples for static selection");

  std::vector<std::size_t> exclude(taken.begin(), taken.end());
  auto dynamic = select_dynamic(pool, question, config.n_dynamic, sim, exclude);
  picks.insert(picks.end(), dynamic.begin(), dynamic.end());
  return picks;
}

}  // namespace actsql
