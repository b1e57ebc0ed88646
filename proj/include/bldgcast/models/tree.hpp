#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/linalg.hpp"

namespace bldgcast {

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::uint32_t>::max();

struct TreeConfig {
  std::size_t max_depth = kUnlimitedDepth;
  std::size_t min_samples_split = 2;
  /// Features examined per split; 0 means all of them.
  std::size_t max_features = 0;

  bool operator==(const TreeConfig&) const = default;
};

/// Squared-error regression tree stored as a flat node array (root at 0).
struct DecisionTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;         // mean training target of the node
    double sse = 0.0;           // training squared error around `value`
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t samples = 0;
    std::uint32_t depth = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes;
  std::size_t n_features = 0;
  TreeConfig config;

  std::size_t depth() const noexcept {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max<std::size_t>(d, n.depth);
    return d;
  }
  std::size_t leaf_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
  }
  bool operator==(const DecisionTree&) const = default;
};

namespace detail {

struct SplitChoice {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

inline std::pair<double, double> mean_and_sse(std::span<const std::uint32_t> idx, std::span<const double> y) {
  double sum = 0.0;
  for (auto i : idx) sum += y[i];
  const double mean = sum / static_cast<double>(idx.size());
  double sse = 0.0;
  for (auto i : idx) sse += (y[i] - mean) * (y[i] - mean);
  return {mean, sse};
}

/// Best (feature, threshold) over midpoints of sorted distinct values.
/// Candidates are visited in ascending (feature, threshold) order and only a
/// strictly smaller error replaces the incumbent.
inline SplitChoice best_split(const Matrix& x, std::span<const double> y, std::span<const std::uint32_t> idx,
                              double mean, std::span<const std::size_t> features,
                              std::vector<std::pair<double, double>>& scratch) {
  SplitChoice best;
  const std::size_t n = idx.size();
  for (std::size_t f : features) {
    scratch.clear();
    for (auto i : idx) scratch.emplace_back(x(i, f), y[i] - mean);
    std::sort(scratch.begin(), scratch.end());
    double total_sum = 0.0, total_sq = 0.0;
    for (const auto& [xv, r] : scratch) {
      total_sum += r;
      total_sq += r * r;
    }
    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += scratch[i].second;
      left_sq += scratch[i].second * scratch[i].second;
      if (!(scratch[i].first < scratch[i + 1].first)) continue;
      const auto nl = static_cast<double>(i + 1);
      const auto nr = static_cast<double>(n - i - 1);
      const double right_sum = total_sum - left_sum;
      const double sse = (left_sq - left_sum * left_sum / nl) + ((total_sq - left_sq) - right_sum * right_sum / nr);
      if (sse < best.sse) {
        double thr = 0.5 * (scratch[i].first + scratch[i + 1].first);
        if (!(thr < scratch[i + 1].first)) thr = scratch[i].first;
        best = {static_cast<std::int32_t>(f), thr, sse};
      }
    }
  }
  return best;
}

}  // namespace detail

/// Greedy CART growth. `feature_sampler`, when given, picks the candidate
/// features for each split (used by the forest); otherwise all are examined.
template <typename FeatureSampler>
DecisionTree tree_fit_with(const Matrix& x, std::span<const double> y, const TreeConfig& cfg,
                           std::vector<std::uint32_t> sample_idx, FeatureSampler&& feature_sampler) {
  if (x.rows() == 0 || sample_idx.empty()) fail(ErrorCode::EmptyInput, "tree_fit on zero rows");
  if (x.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "rows vs targets");

  DecisionTree tree;
  tree.n_features = x.cols();
  tree.config = cfg;

  struct Work {
    std::uint32_t node;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Work> stack;
  std::vector<std::pair<double, double>> scratch;
  std::vector<std::size_t> features;

  auto make_node = [&](std::size_t begin, std::size_t end, std::uint32_t depth) {
    DecisionTree::Node node;
    const std::span<const std::uint32_t> idx(sample_idx.data() + begin, end - begin);
    const auto [mean, sse] = detail::mean_and_sse(idx, y);
    node.value = mean;
    node.sse = sse;
    node.samples = static_cast<std::uint32_t>(end - begin);
    node.depth = depth;
    tree.nodes.push_back(node);
    stack.push_back({static_cast<std::uint32_t>(tree.nodes.size() - 1), begin, end});
  };

  make_node(0, sample_idx.size(), 0);
  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    const DecisionTree::Node node = tree.nodes[w.node];
    const std::span<std::uint32_t> idx(sample_idx.data() + w.begin, w.end - w.begin);
    if (node.depth >= cfg.max_depth || idx.size() < cfg.min_samples_split || idx.size() < 2) continue;
    const double first = y[idx[0]];
    if (std::all_of(idx.begin(), idx.end(), [&](auto i) { return y[i] == first; })) continue;

    feature_sampler(features);
    const auto split = detail::best_split(x, y, idx, node.value, features, scratch);
    if (split.feature < 0) continue;

    const auto f = static_cast<std::size_t>(split.feature);
    const auto mid = std::stable_partition(idx.begin(), idx.end(), [&](auto i) { return x(i, f) <= split.threshold; });
    const std::size_t split_at = w.begin + static_cast<std::size_t>(mid - idx.begin());

    tree.nodes[w.node].feature = split.feature;
    tree.nodes[w.node].threshold = split.threshold;
    // right pushed first so the left subtree is expanded (and numbered) first
    const auto right_id = static_cast<std::uint32_t>(tree.nodes.size());
    make_node(split_at, w.end, node.depth + 1);
    const auto left_id = static_cast<std::uint32_t>(tree.nodes.size());
    make_node(w.begin, split_at, node.depth + 1);
    tree.nodes[w.node].left = left_id;
    tree.nodes[w.node].right = right_id;
  }
  return tree;
}

inline DecisionTree tree_fit(const Matrix& x, std::span<const double> y, const TreeConfig& cfg = {}) {
  std::vector<std::uint32_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0u);
  const std::size_t p = x.cols();
  return tree_fit_with(x, y, cfg, std::move(idx), [p](std::vector<std::size_t>& features) {
    features.resize(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
  });
}

inline DecisionTree tree_fit(const Matrix& x, std::span<const double> y, std::size_t max_depth,
                             std::size_t min_samples_split) {
  return tree_fit(x, y, TreeConfig{max_depth, min_samples_split, 0});
}

/// Rows with x > threshold go right; x <= threshold go left.
inline double tree_predict_row(const DecisionTree& t, std::span<const double> row) {
  std::uint32_t i = 0;
  while (!t.nodes[i].is_leaf()) {
    const auto& n = t.nodes[i];
    i = (row[static_cast<std::size_t>(n.feature)] > n.threshold) ? n.right : n.left;
  }
  return t.nodes[i].value;
}

inline std::vector<double> tree_predict(const DecisionTree& t, const Matrix& x) {
  if (x.cols() != t.n_features) fail(ErrorCode::DimensionMismatch, "feature count differs from training");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = tree_predict_row(t, x.row(i));
  return out;
}

}  // namespace bldgcast
