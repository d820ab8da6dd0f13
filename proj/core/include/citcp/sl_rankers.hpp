#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "citcp/mlp.hpp"
#include "citcp/subject.hpp"
#include "citcp/trees.hpp"

namespace citcp {

// Training instances grouped by cycle. Labels are verdicts (0/1) for the
// verdict-trained rankers and heuristic priorities for the pointwise
// regression technique.
struct LabeledSet {
  struct Group {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
  };
  std::size_t feature_width = 0;
  std::vector<Group> groups;

  std::size_t instance_count() const;
};

// Ordered preference pairs, always within one group.
struct IndexPair {
  std::size_t group = 0;
  std::size_t higher = 0;  // index in group with the larger label
  std::size_t lower = 0;
};

struct PairSet {
  std::vector<IndexPair> pairs;
};

// All within-group pairs across distinct label values; none across groups.
PairSet make_pairs(const LabeledSet& set);

// --- Trained model -----------------------------------------------------

struct ThresholdRanker {
  int feature = 0;
  double threshold = 0.0;
  bool greater = true;  // h(x) = 1 if (x[f] > thr) == greater-orientation
  double alpha = 0.0;
};

struct BoostedThresholds {
  std::vector<ThresholdRanker> rankers;
};

struct NetworkParams {
  Mlp net;
  std::vector<double> feat_mean;
  std::vector<double> feat_scale;
  std::int64_t epochs_trained = 0;
};

struct LinearWeights {
  std::vector<double> w;
  std::vector<double> feat_mean;
  std::vector<double> feat_scale;
};

struct RankerModel {
  std::string kind;  // mart | lambdamart | rankboost | ranknet | coordinate_ascent | deeporder
  std::size_t feature_width = 0;
  std::variant<TreeEnsemble, BoostedThresholds, NetworkParams, LinearWeights> state;
  std::vector<std::pair<std::string, std::string>> config_echo;

  double score(std::span<const double> x) const;
};

// --- Hyperparameters ----------------------------------------------------

struct MartConfig {
  int stages = 50;
  int max_leaves = 8;
  int min_leaf = 1;
  double shrinkage = 0.1;
};

struct LambdaMartConfig {
  MartConfig boost;
  double sigma = 1.0;
};

struct RankBoostConfig {
  int rounds = 100;
  int thresholds_per_feature = 10;
};

struct RankNetConfig {
  std::vector<int> hidden = {10};
  int epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

struct CoordinateAscentConfig {
  int restarts = 5;
  int sweeps = 25;
  int grid_span = 10;  // candidates scale by 2^k, k in [-grid_span, grid_span]
  std::uint64_t seed = 1;
};

struct DeepOrderConfig {
  std::vector<int> hidden = {32, 32, 32};
  int epochs = 150;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

struct SLConfig {
  MartConfig mart;
  LambdaMartConfig lambdamart;
  RankBoostConfig rankboost;
  RankNetConfig ranknet;
  CoordinateAscentConfig coordinate_ascent;
  DeepOrderConfig deeporder;
};

// --- Fits ----------------------------------------------------------------
// All fits are deterministic given their config (and seed where present).
// `warm` continues training from an existing model of the same kind instead
// of starting fresh; shapes must match.

// Stagewise least-squares boosting on the labels; F0 = mean label.
RankerModel fit_mart(const LabeledSet& set, const MartConfig& cfg,
                     const RankerModel* warm = nullptr);

// Boosting on pairwise lambda gradients weighted by the rank-swap change in
// NDCG (binary relevance), recomputed per stage from current scores.
RankerModel fit_lambdamart(const LabeledSet& set, const LambdaMartConfig& cfg,
                           const RankerModel* warm = nullptr);

RankerModel fit_rankboost(const LabeledSet& set, const PairSet& pairs,
                          const RankBoostConfig& cfg, const RankerModel* warm = nullptr);

RankerModel fit_ranknet(const LabeledSet& set, const PairSet& pairs,
                        const RankNetConfig& cfg, const RankerModel* warm = nullptr);

// Linear scorer maximizing mean rectified-APFD over failing training groups.
RankerModel fit_coordinate_ascent(const LabeledSet& set, const CoordinateAscentConfig& cfg,
                                  const RankerModel* warm = nullptr);

// Pointwise squared-error regression on heuristic priority labels.
RankerModel fit_deeporder(const LabeledSet& set, const DeepOrderConfig& cfg,
                          const RankerModel* warm = nullptr);

// Scores one cycle's feature rows; descending score, ties keep input order.
// Never sees verdicts or durations. Throws on width mismatch.
RankedSequence score_cycle(const RankerModel& model,
                           const std::vector<std::vector<double>>& cycle_features);

// Per-pair RankNet loss -log(sigmoid(s_plus - s_minus)); exposed with its
// gradient so tests can check it against finite differences.
double ranknet_pair_loss(double s_plus, double s_minus);

// Self-describing JSON model files; load(save(m)) scores identically to m.
void save_model(const RankerModel& model, const std::string& path);
RankerModel load_model(const std::string& path);
void save_model(const RankerModel& model, std::ostream& out);
RankerModel load_model(std::istream& in, const std::string& source_name);

}  // namespace citcp
