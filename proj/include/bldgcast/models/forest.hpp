#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/linalg.hpp"
#include "bldgcast/models/tree.hpp"
#include "bldgcast/rng.hpp"

namespace bldgcast {

struct ForestConfig {
  std::size_t n_estimators = 500;
  bool bootstrap = true;
  /// Candidate features per split; 0 selects ceil(p / 3).
  std::size_t max_features = 0;
  TreeConfig tree{};

  bool operator==(const ForestConfig&) const = default;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  ForestConfig config;
  std::uint64_t seed = kDefaultSeed;

  bool operator==(const RandomForest&) const = default;
};

inline std::size_t forest_features_per_split(const ForestConfig& cfg, std::size_t p) {
  if (cfg.max_features == 0) return std::max<std::size_t>(1, (p + 2) / 3);
  return std::min(cfg.max_features, p);
}

/// Trains one tree from its own seed: a bootstrap draw of n rows, then a fresh
/// feature subset at every split. Trees are independent of training order.
inline DecisionTree forest_tree(const Matrix& x, std::span<const double> y, const ForestConfig& cfg,
                                std::uint64_t tree_seed) {
  std::mt19937_64 rng(tree_seed);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<std::uint32_t> idx(n);
  if (cfg.bootstrap) {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    for (auto& i : idx) i = pick(rng);
  } else {
    std::iota(idx.begin(), idx.end(), 0u);
  }
  const std::size_t mtry = forest_features_per_split(cfg, p);
  std::vector<std::size_t> pool(p);
  auto sampler = [&](std::vector<std::size_t>& features) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    if (mtry < p) {
      for (std::size_t i = 0; i < mtry; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, p - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
    }
    features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(mtry));
    std::sort(features.begin(), features.end());
  };
  return tree_fit_with(x, y, cfg.tree, std::move(idx), sampler);
}

inline RandomForest forest_fit(const Matrix& x, std::span<const double> y, const ForestConfig& cfg,
                               std::uint64_t seed = kDefaultSeed) {
  if (x.rows() == 0) fail(ErrorCode::EmptyInput, "forest_fit on zero rows");
  if (x.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "rows vs targets");
  if (cfg.n_estimators == 0) fail(ErrorCode::InvalidConfig, "n_estimators must be at least 1");
  RandomForest f;
  f.config = cfg;
  f.seed = seed;
  f.trees.reserve(cfg.n_estimators);
  for (std::size_t t = 0; t < cfg.n_estimators; ++t) {
    f.tree_seeds.push_back(derive_seed(seed, t));
    f.trees.push_back(forest_tree(x, y, cfg, f.tree_seeds.back()));
  }
  return f;
}

inline RandomForest forest_fit(const Matrix& x, std::span<const double> y, std::size_t n_estimators,
                               std::uint64_t seed = kDefaultSeed) {
  ForestConfig cfg;
  cfg.n_estimators = n_estimators;
  return forest_fit(x, y, cfg, seed);
}

/// Arithmetic mean of member predictions, summed in tree order.
inline std::vector<double> forest_predict(const RandomForest& f, const Matrix& x) {
  if (f.trees.empty()) fail(ErrorCode::EmptyInput, "forest has no trees");
  if (x.cols() != f.trees.front().n_features) fail(ErrorCode::DimensionMismatch, "feature count differs from training");
  std::vector<double> out(x.rows(), 0.0);
  for (const auto& t : f.trees) {
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] += tree_predict_row(t, x.row(i));
  }
  for (double& v : out) v /= static_cast<double>(f.trees.size());
  return out;
}

}  // namespace bldgcast
