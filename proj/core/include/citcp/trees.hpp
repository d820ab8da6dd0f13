#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace citcp {

// Binary regression tree stored as a flat node array; nodes[0] is the root.
// Routing rule: x[feature] <= threshold goes left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;  // leaf prediction
  int left = -1;
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t leaf_count() const;
};

struct TreeFitConfig {
  int max_leaves = 8;
  int min_leaf = 1;  // minimum samples per leaf
};

// Least-squares fit with best-first leaf expansion; fully deterministic
// (split ties resolve to the lowest feature index, then lowest threshold).
RegressionTree fit_regression_tree(const std::vector<std::vector<double>>& x,
                                   const std::vector<double>& y,
                                   const TreeFitConfig& cfg);

// Additive model: base_score + shrinkage * sum(tree outputs).
struct TreeEnsemble {
  double base_score = 0.0;
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const;
};

}  // namespace citcp
