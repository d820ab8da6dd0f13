#include "citcp/trees.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace citcp {

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t RegressionTree::leaf_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.feature < 0 ? 1 : 0;
  return n;
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // sum-of-squares reduction
  double left_sum = 0.0, right_sum = 0.0;
  std::size_t left_n = 0, right_n = 0;
};

// Members of one growable leaf plus the best split found for it.
struct Frontier {
  int node = 0;
  std::vector<std::size_t> members;
  SplitChoice split;
};

SplitChoice best_split(const std::vector<std::vector<double>>& x,
                       const std::vector<double>& y,
                       const std::vector<std::size_t>& members, int min_leaf) {
  SplitChoice best;
  const std::size_t n = members.size();
  if (n < 2 * static_cast<std::size_t>(min_leaf)) return best;
  const std::size_t nfeat = x[members[0]].size();

  double total = 0.0;
  for (std::size_t i : members) total += y[i];

  std::vector<std::size_t> order(members);
  for (std::size_t f = 0; f < nfeat; ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x[a][f] < x[b][f];
    });
    double left_sum = 0.0;
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      left_sum += y[order[pos]];
      const double cur = x[order[pos]][f];
      const double next = x[order[pos + 1]][f];
      if (cur == next) continue;  // no threshold separates equal values
      const std::size_t ln = pos + 1;
      const std::size_t rn = n - ln;
      if (ln < static_cast<std::size_t>(min_leaf) || rn < static_cast<std::size_t>(min_leaf))
        continue;
      const double right_sum = total - left_sum;
      // Gain = SSE(parent) - SSE(children) = sum_l^2/n_l + sum_r^2/n_r - total^2/n.
      const double gain = left_sum * left_sum / static_cast<double>(ln) +
                          right_sum * right_sum / static_cast<double>(rn) -
                          total * total / static_cast<double>(n);
      if (gain > best.gain + 1e-12) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (cur + next);
        best.gain = gain;
        best.left_sum = left_sum;
        best.right_sum = right_sum;
        best.left_n = ln;
        best.right_n = rn;
      }
    }
  }
  return best;
}

}  // namespace

RegressionTree fit_regression_tree(const std::vector<std::vector<double>>& x,
                                   const std::vector<double>& y,
                                   const TreeFitConfig& cfg) {
  if (x.size() != y.size()) throw std::invalid_argument("tree fit: x/y size mismatch");
  if (x.empty()) throw std::invalid_argument("tree fit: empty training set");
  if (cfg.max_leaves < 1 || cfg.min_leaf < 1)
    throw std::invalid_argument("tree fit: max_leaves and min_leaf must be positive");

  RegressionTree tree;
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  double total = 0.0;
  for (double v : y) total += v;

  TreeNode root;
  root.value = total / static_cast<double>(y.size());
  tree.nodes.push_back(root);

  std::vector<Frontier> frontier;
  frontier.push_back({0, std::move(all), {}});
  frontier.back().split = best_split(x, y, frontier.back().members, cfg.min_leaf);

  int leaves = 1;
  while (leaves < cfg.max_leaves) {
    // Pick the frontier leaf with the largest gain; ties keep earliest node.
    std::size_t pick = frontier.size();
    double best_gain = 0.0;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (frontier[i].split.found && frontier[i].split.gain > best_gain) {
        best_gain = frontier[i].split.gain;
        pick = i;
      }
    }
    if (pick == frontier.size()) break;  // nothing splittable

    Frontier chosen = std::move(frontier[pick]);
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));

    const SplitChoice& s = chosen.split;
    Frontier left, right;
    left.members.reserve(s.left_n);
    right.members.reserve(s.right_n);
    for (std::size_t i : chosen.members) {
      if (x[i][static_cast<std::size_t>(s.feature)] <= s.threshold)
        left.members.push_back(i);
      else
        right.members.push_back(i);
    }

    TreeNode& parent = tree.nodes[static_cast<std::size_t>(chosen.node)];
    parent.feature = s.feature;
    parent.threshold = s.threshold;
    parent.left = static_cast<int>(tree.nodes.size());
    parent.right = parent.left + 1;

    TreeNode lnode, rnode;
    lnode.value = s.left_sum / static_cast<double>(s.left_n);
    rnode.value = s.right_sum / static_cast<double>(s.right_n);
    left.node = parent.left;
    right.node = parent.right;
    tree.nodes.push_back(lnode);
    tree.nodes.push_back(rnode);

    left.split = best_split(x, y, left.members, cfg.min_leaf);
    right.split = best_split(x, y, right.members, cfg.min_leaf);
    frontier.push_back(std::move(left));
    frontier.push_back(std::move(right));
    ++leaves;
  }
  return tree;
}

double TreeEnsemble::predict(std::span<const double> x) const {
  double acc = base_score;
  for (const auto& t : trees) acc += shrinkage * t.predict(x);
  return acc;
}

}  // namespace citcp
