#include <algorithm>
#include <cmath>
#include <numeric>

#include "citcp/errors.hpp"
#include "citcp/harness.hpp"
#include "citcp/rng.hpp"

namespace citcp {

LabeledSet smote_augment(const LabeledSet& train, const SmoteConfig& cfg) {
  if (cfg.k_neighbors < 1) throw ConfigError("smote: k_neighbors must be >= 1");
  if (!(cfg.target_ratio > 0.0 && cfg.target_ratio < 1.0))
    throw ConfigError("smote: target_ratio must be in (0, 1)");

  struct Ref {
    std::size_t group, index;
  };
  std::vector<Ref> minority;
  std::size_t majority_count = 0;
  for (std::size_t g = 0; g < train.groups.size(); ++g) {
    for (std::size_t i = 0; i < train.groups[g].y.size(); ++i) {
      if (train.groups[g].y[i] > 0.5)
        minority.push_back({g, i});
      else
        ++majority_count;
    }
  }
  if (minority.size() < 2)
    throw DataError("smote: need at least 2 failing instances, have " +
                    std::to_string(minority.size()));

  const int k = std::min<int>(cfg.k_neighbors, static_cast<int>(minority.size()) - 1);

  // Want failing/(failing + passing) == target_ratio.
  const double wanted = cfg.target_ratio * static_cast<double>(majority_count) /
                        (1.0 - cfg.target_ratio);
  const std::size_t synth_count =
      wanted > static_cast<double>(minority.size())
          ? static_cast<std::size_t>(std::llround(wanted)) - minority.size()
          : 0;

  // k nearest failing neighbors per failing instance (Euclidean, ties by
  // enumeration order, self excluded).
  const auto& row = [&](const Ref& r) -> const std::vector<double>& {
    return train.groups[r.group].x[r.index];
  };
  std::vector<std::vector<std::size_t>> neighbors(minority.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < minority.size(); ++i) {
    dist.clear();
    for (std::size_t j = 0; j < minority.size(); ++j) {
      if (j == i) continue;
      const auto& a = row(minority[i]);
      const auto& b = row(minority[j]);
      double d2 = 0.0;
      for (std::size_t f = 0; f < a.size(); ++f) d2 += (a[f] - b[f]) * (a[f] - b[f]);
      dist.emplace_back(d2, j);
    }
    std::stable_sort(dist.begin(), dist.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    neighbors[i].reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) neighbors[i].push_back(dist[static_cast<std::size_t>(t)].second);
  }

  LabeledSet out = train;
  Rng rng(cfg.seed);
  for (std::size_t s = 0; s < synth_count; ++s) {
    const std::size_t src = s % minority.size();
    const std::size_t nn = neighbors[src][rng.below(neighbors[src].size())];
    const double delta = rng.uniform();
    const auto& a = row(minority[src]);
    const auto& b = row(minority[nn]);
    std::vector<double> x(a.size());
    for (std::size_t f = 0; f < a.size(); ++f) x[f] = a[f] + delta * (b[f] - a[f]);
    LabeledSet::Group& grp = out.groups[minority[src].group];
    grp.x.push_back(std::move(x));
    grp.y.push_back(train.groups[minority[src].group].y[minority[src].index]);
  }
  return out;
}

}  // namespace citcp
