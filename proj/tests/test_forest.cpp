#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace bldgcast;

TEST(Forest, DegenerateForestEqualsTree) {
  std::mt19937_64 rng(1);
  Matrix x;
  std::vector<double> y;
  oracle::random_linear(rng, 120, 3, 0.5, x, y);
  ForestConfig cfg;
  cfg.n_estimators = 1;
  cfg.bootstrap = false;
  cfg.max_features = 3;
  cfg.tree = {6, 2, 0};
  const auto f = forest_fit(x, y, cfg, 9);
  const auto t = tree_fit(x, y, 6, 2);
  EXPECT_EQ(f.trees[0].nodes, t.nodes);
  EXPECT_EQ(forest_predict(f, x), tree_predict(t, x));
}

TEST(Forest, MeanOfTwoConstantTrees) {
  RandomForest f;
  for (double c : {2.0, 5.0}) {
    DecisionTree t;
    t.n_features = 1;
    t.nodes.resize(1);
    t.nodes[0].value = c;
    f.trees.push_back(t);
  }
  EXPECT_EQ(forest_predict(f, Matrix::from_rows({{0.0}}))[0], 3.5);
}

TEST(Forest, PredictionIsExactMeanOfTrees) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x;
    std::vector<double> y;
    oracle::random_linear(rng, 80, 4, 0.5, x, y);
    const auto f = forest_fit(x, y, 7, 100 + trial);
    const auto p = forest_predict(f, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = 0;
      for (const auto& t : f.trees) s += tree_predict_row(t, x.row(i));
      EXPECT_EQ(p[i], s / static_cast<double>(f.trees.size()));
    }
  }
}

TEST(Forest, SameSeedBitIdenticalDifferentSeedDiffers) {
  std::mt19937_64 rng(3);
  Matrix x;
  std::vector<double> y;
  oracle::random_linear(rng, 100, 5, 0.5, x, y);
  const auto a = forest_fit(x, y, 10, 42);
  const auto b = forest_fit(x, y, 10, 42);
  EXPECT_EQ(a, b);
  const auto c = forest_fit(x, y, 10, 43);
  EXPECT_NE(a.trees, c.trees);
}

TEST(Forest, TreesDependOnlyOnTheirSeed) {
  std::mt19937_64 rng(4);
  Matrix x;
  std::vector<double> y;
  oracle::random_linear(rng, 60, 3, 0.5, x, y);
  const auto f = forest_fit(x, y, 5, 77);
  ForestConfig cfg;
  cfg.n_estimators = 5;
  // any tree can be rebuilt alone, so parallel training gives the same forest
  EXPECT_EQ(forest_tree(x, y, cfg, f.tree_seeds[3]), f.trees[3]);
}

TEST(Forest, FeatureSubsetSize) {
  ForestConfig cfg;
  EXPECT_EQ(forest_features_per_split(cfg, 7), 3u);
  EXPECT_EQ(forest_features_per_split(cfg, 3), 1u);
  EXPECT_EQ(forest_features_per_split(cfg, 1), 1u);
  cfg.max_features = 10;
  EXPECT_EQ(forest_features_per_split(cfg, 4), 4u);
}

TEST(Forest, Errors) {
  EXPECT_ERROR_CODE(forest_fit(Matrix(0, 2), std::vector<double>{}, 3), ErrorCode::EmptyInput);
  EXPECT_ERROR_CODE(forest_fit(Matrix::from_rows({{1}}), std::vector<double>{1}, 0), ErrorCode::InvalidConfig);
  EXPECT_ERROR_CODE(forest_predict(RandomForest{}, Matrix::from_rows({{1}})), ErrorCode::EmptyInput);
}
