#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace bldgcast;

TEST(Tree, ConstantTargetIsOneLeaf) {
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}});
  const std::vector<double> y = {4, 4, 4};
  const auto t = tree_fit(x, y);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].value, 4.0);
  EXPECT_EQ(tree_predict(t, Matrix::from_rows({{100}}))[0], 4.0);
}

TEST(Tree, HandSplit) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<double> y = {0, 0, 10, 10};
  const auto t = tree_fit(x, y, 1, 2);
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_EQ(t.nodes[0].threshold, 1.5);
  EXPECT_EQ(t.nodes[t.nodes[0].left].value, 0.0);
  EXPECT_EQ(t.nodes[t.nodes[0].right].value, 10.0);
}

TEST(Tree, BoundaryGoesLeftAboveGoesRight) {
  DecisionTree t;
  t.n_features = 1;
  t.nodes.resize(3);
  t.nodes[0].feature = 0;
  t.nodes[0].threshold = 2.0;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  t.nodes[1].value = -1;
  t.nodes[2].value = 1;
  const auto p = tree_predict(t, Matrix::from_rows({{2.0}, {2.0000001}, {1.0}}));
  EXPECT_EQ(p, (std::vector<double>{-1, 1, -1}));
}

TEST(Tree, HandBuiltRoutingTrace) {
  // root: f1 <= 0.5 ? (f0 <= 3 ? 1 : 2) : 3
  DecisionTree t;
  t.n_features = 2;
  t.nodes.resize(5);
  t.nodes[0] = {1, 0.5, 0, 0, 1, 2, 0, 0};
  t.nodes[1] = {0, 3.0, 0, 0, 3, 4, 0, 1};
  t.nodes[2].value = 3;
  t.nodes[3].value = 1;
  t.nodes[4].value = 2;
  const auto p = tree_predict(t, Matrix::from_rows({{0, 0}, {5, 0}, {0, 1}, {3, 0.5}}));
  EXPECT_EQ(p, (std::vector<double>{1, 2, 3, 1}));
  EXPECT_ERROR_CODE(tree_predict(t, Matrix::from_rows({{1}})), ErrorCode::DimensionMismatch);
}

TEST(Tree, FullyGrownReproducesTraining) {
  std::mt19937_64 rng(8);
  Matrix x;
  std::vector<double> y;
  oracle::random_linear(rng, 100, 3, 1.0, x, y);
  const auto t = tree_fit(x, y, kUnlimitedDepth, 2);
  const auto p = tree_predict(t, x);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(p[i], y[i]);
}

TEST(Tree, TieBreakLowestFeature) {
  // both features split the targets identically
  const Matrix x = Matrix::from_rows({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const std::vector<double> y = {0, 0, 1, 1};
  const auto t = tree_fit(x, y, 1, 2);
  EXPECT_EQ(t.nodes[0].feature, 0);
}

TEST(Tree, MatchesBruteForceOracleUpToDepthTwo) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 63;
    const std::size_t p = 1 + rng() % 3;
    Matrix x(n, p);
    std::vector<double> y(n);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) x(i, j) = std::round(u(rng) * 20) / 4;  // repeated values on purpose
      y[i] = u(rng) * 10;
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t depth : {1u, 2u}) {
      const auto t = tree_fit(x, y, depth, 2);
      EXPECT_NEAR(oracle::tree_leaf_sse(t), oracle::tree_sse(x, y, all, depth), 1e-9) << "trial " << trial;
      EXPECT_LE(t.depth(), depth);
    }
  }
}

TEST(Tree, StructuralInvariants) {
  std::mt19937_64 rng(31);
  Matrix x;
  std::vector<double> y;
  oracle::random_linear(rng, 300, 4, 0.5, x, y);
  const auto t = tree_fit(x, y, 8, 5);
  EXPECT_LE(t.depth(), 8u);
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) continue;
    const auto& l = t.nodes[n.left];
    const auto& r = t.nodes[n.right];
    EXPECT_GE(n.samples, 5u);
    EXPECT_GT(l.samples, 0u);
    EXPECT_GT(r.samples, 0u);
    EXPECT_EQ(l.samples + r.samples, n.samples);
    EXPECT_LE(l.sse + r.sse, n.sse + 1e-9 * (1 + n.sse));
  }
  // leaf value is the mean of the training targets routed to it
  std::map<const DecisionTree::Node*, std::pair<double, int>> sums;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::uint32_t k = 0;
    while (!t.nodes[k].is_leaf()) k = x(i, static_cast<std::size_t>(t.nodes[k].feature)) > t.nodes[k].threshold ? t.nodes[k].right : t.nodes[k].left;
    sums[&t.nodes[k]].first += y[i];
    sums[&t.nodes[k]].second += 1;
  }
  for (const auto& [node, s] : sums) {
    EXPECT_NEAR(node->value, s.first / s.second, 1e-12);
    EXPECT_EQ(node->samples, static_cast<std::uint32_t>(s.second));
  }
}

TEST(Tree, MinSamplesSplitStops) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<double> y = {0, 1, 2, 3};
  EXPECT_EQ(tree_fit(x, y, 10, 5).nodes.size(), 1u);
  EXPECT_ERROR_CODE(tree_fit(Matrix(0, 1), std::vector<double>{}), ErrorCode::EmptyInput);
}

TEST(Tree, Deterministic) {
  std::mt19937_64 rng(5);
  Matrix x;
  std::vector<double> y;
  oracle::random_linear(rng, 200, 3, 0.5, x, y);
  EXPECT_EQ(tree_fit(x, y, 14, 20), tree_fit(x, y, 14, 20));
}
