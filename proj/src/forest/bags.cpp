#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hforest/forest.hpp"

namespace hforest {

std::size_t weak_learner_feature_count(std::size_t f_total) {
  if (f_total == 0) throw ConfigError("feature count must be positive");
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(f_total))));
  // guard against sqrt rounding on perfect squares
  while (k > 1 && (k - 1) * (k - 1) >= f_total) --k;
  while (k * k < f_total) ++k;
  return std::min(k, f_total);
}

std::vector<FeatureBag> generate_bags(const Schema& schema, std::size_t m, std::uint64_t rng_seed) {
  const std::size_t f_total = schema.feature_count();
  const std::size_t per_bag = weak_learner_feature_count(f_total);
  std::mt19937_64 rng(rng_seed);
  std::vector<std::size_t> pool(f_total);
  std::vector<FeatureBag> bags;
  bags.reserve(m);
  for (std::size_t id = 0; id < m; ++id) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // partial Fisher-Yates: the first per_bag slots become the sample
    for (std::size_t i = 0; i < per_bag; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, f_total - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    FeatureBag bag{id, std::vector<std::size_t>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per_bag))};
    std::sort(bag.features.begin(), bag.features.end());
    bags.push_back(std::move(bag));
  }
  return bags;
}

Schema project_schema(const Schema& schema, const FeatureBag& bag) {
  std::vector<FeatureSpec> features;
  features.reserve(bag.features.size());
  for (std::size_t f : bag.features) features.push_back(schema.feature(f));
  if (schema.is_classification()) return Schema::classification(std::move(features), schema.class_count());
  return Schema::regression(std::move(features));
}

void project_instance(const Instance& inst, const FeatureBag& bag, Instance& out) {
  out.values.resize(bag.features.size());
  for (std::size_t i = 0; i < bag.features.size(); ++i) out.values[i] = inst.values[bag.features[i]];
  out.target = inst.target;
}

double confidence(std::size_t n, std::size_t m) {
  if (n == 0) throw ConfigError("confidence: n must be positive");
  if (m == 0) return 0.0;
  if (n == 1) return 1.0;
  const double draws = static_cast<double>(m) * std::sqrt(static_cast<double>(n));
  // 1 - ((n-1)/n)^draws, evaluated without cancellation
  return -std::expm1(draws * std::log1p(-1.0 / static_cast<double>(n)));
}

std::size_t min_learners_for_confidence(std::size_t n, double target) {
  if (n < 2) throw ConfigError("min_learners_for_confidence: n must be at least 2");
  if (target >= 1.0) throw UnreachableTarget("confidence never reaches 1 for n >= 2");
  if (!(target > 0.0)) throw ConfigError("min_learners_for_confidence: target must lie in (0,1)");
  const double per_learner = std::sqrt(static_cast<double>(n)) * std::log1p(-1.0 / static_cast<double>(n));
  auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(std::log1p(-target) / per_learner)));
  while (m > 1 && confidence(n, m - 1) >= target) --m;
  while (confidence(n, m) < target) ++m;
  return m;
}

}  // namespace hforest
