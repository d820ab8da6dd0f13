#include <cmath>
#include <limits>
#include <vector>

#include "citcp/rng.hpp"
#include "citcp/trees.hpp"
#include "doctest.h"

using namespace citcp;

namespace {

// Brute-force reference for the best first split: scan every (feature,
// threshold at a sample value) pair and return the lowest achievable total
// squared error after one split honoring min_leaf.
double best_single_split_sse(const std::vector<std::vector<double>>& x,
                             const std::vector<double>& y, int min_leaf) {
  auto sse_of = [&](const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    double mean = 0.0;
    for (auto i : idx) mean += y[i];
    mean /= static_cast<double>(idx.size());
    double sse = 0.0;
    for (auto i : idx) sse += (y[i] - mean) * (y[i] - mean);
    return sse;
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    for (const auto& row : x) {
      const double thr = row[f];
      std::vector<std::size_t> left, right;
      for (std::size_t i = 0; i < x.size(); ++i)
        (x[i][f] <= thr ? left : right).push_back(i);
      if (left.size() < static_cast<std::size_t>(min_leaf) ||
          right.size() < static_cast<std::size_t>(min_leaf))
        continue;
      best = std::min(best, sse_of(left) + sse_of(right));
    }
  }
  return best;
}

double model_sse(const RegressionTree& tree, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& y) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = tree.predict(x[i]);
    sse += (p - y[i]) * (p - y[i]);
  }
  return sse;
}

}  // namespace

TEST_CASE("a two-leaf tree finds the best single split") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    const std::size_t n = 6 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
      y.push_back(rng.uniform(-1, 1));
    }
    TreeFitConfig cfg;
    cfg.max_leaves = 2;
    cfg.min_leaf = 2;
    auto tree = fit_regression_tree(x, y, cfg);
    const double expect = best_single_split_sse(x, y, cfg.min_leaf);
    if (std::isinf(expect)) continue;
    CHECK(model_sse(tree, x, y) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(tree.leaf_count() == 2);
  }
}

TEST_CASE("constant targets produce a single leaf with their value") {
  std::vector<std::vector<double>> x = {{0.0}, {1.0}, {2.0}, {3.0}};
  std::vector<double> y = {4.5, 4.5, 4.5, 4.5};
  auto tree = fit_regression_tree(x, y, TreeFitConfig{});
  CHECK(tree.leaf_count() == 1);
  const std::vector<double> far{7.0};
  CHECK(tree.predict(far) == doctest::Approx(4.5));
}

TEST_CASE("leaf count never exceeds the limit") {
  Rng rng(31);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
    y.push_back(rng.uniform(0, 1));
  }
  for (int max_leaves : {2, 3, 4, 8, 16}) {
    TreeFitConfig cfg;
    cfg.max_leaves = max_leaves;
    auto tree = fit_regression_tree(x, y, cfg);
    CHECK(tree.leaf_count() <= static_cast<std::size_t>(max_leaves));
    CHECK(tree.leaf_count() >= 2);
  }
}

TEST_CASE("min_leaf keeps small groups intact") {
  // 3 points far left, 1 point far right: min_leaf 2 forbids isolating it.
  std::vector<std::vector<double>> x = {{0.0}, {0.1}, {0.2}, {10.0}};
  std::vector<double> y = {0.0, 0.0, 0.0, 1.0};
  TreeFitConfig strict;
  strict.max_leaves = 4;
  strict.min_leaf = 2;
  auto tree = fit_regression_tree(x, y, strict);
  for (const auto& node : tree.nodes) {
    if (node.feature < 0) continue;
    // Any split must leave >= 2 samples on each side; the only legal one here
    // is between 0.1 and 0.2.
    CHECK(node.threshold >= 0.1);
    CHECK(node.threshold < 10.0);
  }

  TreeFitConfig loose;
  loose.max_leaves = 4;
  loose.min_leaf = 1;
  auto tree2 = fit_regression_tree(x, y, loose);
  CHECK(model_sse(tree2, x, y) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a deeper tree recovers an axis-aligned step function exactly") {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (double a : {0.0, 1.0})
    for (double b : {0.0, 1.0})
      for (int rep = 0; rep < 3; ++rep) {
        x.push_back({a, b});
        y.push_back(a * 2.0 + b);
      }
  TreeFitConfig cfg;
  cfg.max_leaves = 4;
  auto tree = fit_regression_tree(x, y, cfg);
  CHECK(model_sse(tree, x, y) == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> probe{1.0, 0.0};
  CHECK(tree.predict(probe) == doctest::Approx(2.0));
}

TEST_CASE("identical inputs give identical trees and tie-breaks are stable") {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const double v = rng.uniform(0, 1);
    // Feature 1 duplicates feature 0, so every split gain ties across them.
    x.push_back({v, v});
    y.push_back(v > 0.5 ? 1.0 : 0.0);
  }
  auto t1 = fit_regression_tree(x, y, TreeFitConfig{});
  auto t2 = fit_regression_tree(x, y, TreeFitConfig{});
  REQUIRE(t1.nodes.size() == t2.nodes.size());
  for (std::size_t i = 0; i < t1.nodes.size(); ++i) {
    CHECK(t1.nodes[i].feature == t2.nodes[i].feature);
    CHECK(t1.nodes[i].threshold == t2.nodes[i].threshold);
  }
  // Ties resolve to the lower feature index.
  CHECK(t1.nodes[0].feature == 0);
}

TEST_CASE("ensembles add base score plus shrunk tree outputs") {
  TreeEnsemble ens;
  ens.base_score = 0.25;
  ens.shrinkage = 0.5;
  RegressionTree leaf;
  leaf.nodes.push_back({-1, 0.0, 2.0, -1, -1});
  ens.trees.push_back(leaf);
  ens.trees.push_back(leaf);
  const std::vector<double> origin{0.0};
  CHECK(ens.predict(origin) == doctest::Approx(0.25 + 0.5 * 4.0));
}
