#include "citcp/sl_rankers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "citcp/errors.hpp"
#include "citcp/rng.hpp"

namespace citcp {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void require_nonempty(const LabeledSet& set) {
  if (set.instance_count() == 0) throw DataError("training set is empty");
  for (const auto& g : set.groups) {
    if (g.x.size() != g.y.size())
      throw std::invalid_argument("labeled group has mismatched x/y sizes");
    for (const auto& row : g.x)
      if (row.size() != set.feature_width)
        throw std::invalid_argument("labeled instance width mismatch");
  }
}

struct Flat {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  std::vector<std::size_t> group_begin;  // per group, offset into x
};

Flat flatten(const LabeledSet& set) {
  Flat f;
  f.group_begin.reserve(set.groups.size());
  for (const auto& g : set.groups) {
    f.group_begin.push_back(f.x.size());
    f.x.insert(f.x.end(), g.x.begin(), g.x.end());
    f.y.insert(f.y.end(), g.y.begin(), g.y.end());
  }
  return f;
}

struct Scaler {
  std::vector<double> mean, scale;
};

Scaler fit_scaler(const std::vector<std::vector<double>>& x, std::size_t width) {
  Scaler s;
  s.mean.assign(width, 0.0);
  s.scale.assign(width, 1.0);
  if (x.empty()) return s;
  for (const auto& row : x)
    for (std::size_t j = 0; j < width; ++j) s.mean[j] += row[j];
  for (double& m : s.mean) m /= static_cast<double>(x.size());
  std::vector<double> var(width, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < width; ++j) {
      const double d = row[j] - s.mean[j];
      var[j] += d * d;
    }
  for (std::size_t j = 0; j < width; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(x.size()));
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

std::vector<double> standardized(std::span<const double> x, const std::vector<double>& mean,
                                 const std::vector<double>& scale) {
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / scale[j];
  return z;
}

// Rectified mean fault-detection position from binary labels; 1 when every
// positive precedes every negative under `order`.
double rapfd_from_labels(const std::vector<std::size_t>& order, const std::vector<double>& y) {
  const std::size_t k = order.size();
  std::size_t m = 0;
  for (double v : y) m += v > 0.5 ? 1 : 0;
  if (m == 0 || m == k) return 1.0;
  double rank_sum = 0.0;
  for (std::size_t p = 0; p < k; ++p)
    if (y[order[p]] > 0.5) rank_sum += static_cast<double>(p + 1);
  const double kd = static_cast<double>(k);
  const double apfd_v = 1.0 - rank_sum / (kd * static_cast<double>(m)) + 1.0 / (2.0 * kd);
  const double lo = static_cast<double>(m) / (2.0 * kd);
  return (apfd_v - lo) / (1.0 - 2.0 * lo);
}

const TreeEnsemble* warm_ensemble(const RankerModel* warm, const std::string& kind,
                                  std::size_t width) {
  if (warm == nullptr) return nullptr;
  if (warm->kind != kind)
    throw std::invalid_argument("warm-start model kind '" + warm->kind +
                                "' does not match '" + kind + "'");
  if (warm->feature_width != width)
    throw std::invalid_argument("warm-start model feature width mismatch");
  return &std::get<TreeEnsemble>(warm->state);
}

}  // namespace

std::size_t LabeledSet::instance_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.x.size();
  return n;
}

PairSet make_pairs(const LabeledSet& set) {
  PairSet out;
  for (std::size_t gi = 0; gi < set.groups.size(); ++gi) {
    const auto& g = set.groups[gi];
    for (std::size_t i = 0; i < g.y.size(); ++i) {
      for (std::size_t j = 0; j < g.y.size(); ++j) {
        if (g.y[i] > g.y[j]) out.pairs.push_back({gi, i, j});
      }
    }
  }
  return out;
}

double RankerModel::score(std::span<const double> x) const {
  if (x.size() != feature_width)
    throw std::invalid_argument("score: feature width mismatch");
  if (const auto* t = std::get_if<TreeEnsemble>(&state)) return t->predict(x);
  if (const auto* b = std::get_if<BoostedThresholds>(&state)) {
    double acc = 0.0;
    for (const auto& r : b->rankers) {
      const bool above = x[static_cast<std::size_t>(r.feature)] > r.threshold;
      acc += r.alpha * ((above == r.greater) ? 1.0 : 0.0);
    }
    return acc;
  }
  if (const auto* n = std::get_if<NetworkParams>(&state)) {
    return n->net.forward(standardized(x, n->feat_mean, n->feat_scale))[0];
  }
  const auto& l = std::get<LinearWeights>(state);
  const std::vector<double> z = standardized(x, l.feat_mean, l.feat_scale);
  double acc = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) acc += l.w[j] * z[j];
  return acc;
}

RankerModel fit_mart(const LabeledSet& set, const MartConfig& cfg, const RankerModel* warm) {
  require_nonempty(set);
  if (cfg.stages < 0 || cfg.max_leaves < 1 || cfg.min_leaf < 1 || cfg.shrinkage <= 0.0)
    throw ConfigError("mart: invalid hyperparameters");
  const Flat flat = flatten(set);

  RankerModel model;
  model.kind = "mart";
  model.feature_width = set.feature_width;
  TreeEnsemble ens;
  if (const TreeEnsemble* w = warm_ensemble(warm, "mart", set.feature_width)) {
    ens = *w;
  } else {
    ens.shrinkage = cfg.shrinkage;
    ens.base_score =
        std::accumulate(flat.y.begin(), flat.y.end(), 0.0) / static_cast<double>(flat.y.size());
  }

  std::vector<double> score(flat.x.size());
  for (std::size_t i = 0; i < flat.x.size(); ++i) score[i] = ens.predict(flat.x[i]);

  const TreeFitConfig tree_cfg{cfg.max_leaves, cfg.min_leaf};
  std::vector<double> residual(flat.y.size());
  for (int stage = 0; stage < cfg.stages; ++stage) {
    for (std::size_t i = 0; i < flat.y.size(); ++i) residual[i] = flat.y[i] - score[i];
    RegressionTree tree = fit_regression_tree(flat.x, residual, tree_cfg);
    for (std::size_t i = 0; i < flat.x.size(); ++i)
      score[i] += ens.shrinkage * tree.predict(flat.x[i]);
    ens.trees.push_back(std::move(tree));
  }
  model.state = std::move(ens);
  model.config_echo = {{"stages", std::to_string(cfg.stages)},
                       {"max_leaves", std::to_string(cfg.max_leaves)},
                       {"min_leaf", std::to_string(cfg.min_leaf)},
                       {"shrinkage", fmt(cfg.shrinkage)}};
  return model;
}

RankerModel fit_lambdamart(const LabeledSet& set, const LambdaMartConfig& cfg,
                           const RankerModel* warm) {
  require_nonempty(set);
  const MartConfig& b = cfg.boost;
  if (b.stages < 0 || b.max_leaves < 1 || b.min_leaf < 1 || b.shrinkage <= 0.0 ||
      cfg.sigma <= 0.0)
    throw ConfigError("lambdamart: invalid hyperparameters");
  const Flat flat = flatten(set);

  RankerModel model;
  model.kind = "lambdamart";
  model.feature_width = set.feature_width;
  TreeEnsemble ens;
  if (const TreeEnsemble* w = warm_ensemble(warm, "lambdamart", set.feature_width)) {
    ens = *w;
  } else {
    ens.shrinkage = b.shrinkage;
    ens.base_score = 0.0;
  }

  // Gains and per-group ideal DCG are fixed across stages.
  std::vector<double> gain(flat.y.size());
  for (std::size_t i = 0; i < flat.y.size(); ++i) gain[i] = std::exp2(flat.y[i]) - 1.0;
  const auto discount = [](std::size_t pos1based) {
    return 1.0 / std::log2(static_cast<double>(pos1based) + 1.0);
  };
  std::vector<double> max_dcg(set.groups.size(), 0.0);
  for (std::size_t gi = 0; gi < set.groups.size(); ++gi) {
    const std::size_t begin = flat.group_begin[gi];
    const std::size_t n = set.groups[gi].x.size();
    std::vector<double> g(gain.begin() + begin, gain.begin() + begin + n);
    std::sort(g.begin(), g.end(), std::greater<>());
    for (std::size_t p = 0; p < n; ++p) max_dcg[gi] += g[p] * discount(p + 1);
  }

  std::vector<double> score(flat.x.size());
  for (std::size_t i = 0; i < flat.x.size(); ++i) score[i] = ens.predict(flat.x[i]);

  const TreeFitConfig tree_cfg{b.max_leaves, b.min_leaf};
  std::vector<double> lambda(flat.y.size());
  for (int stage = 0; stage < b.stages; ++stage) {
    std::fill(lambda.begin(), lambda.end(), 0.0);
    for (std::size_t gi = 0; gi < set.groups.size(); ++gi) {
      if (max_dcg[gi] <= 0.0) continue;  // no relevant instance, zero lambdas
      const std::size_t begin = flat.group_begin[gi];
      const std::size_t n = set.groups[gi].x.size();
      std::vector<double> local(score.begin() + begin, score.begin() + begin + n);
      const RankedSequence seq = RankedSequence::from_scores(std::move(local));
      const std::vector<std::size_t> pos = seq.ranks();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (flat.y[begin + i] <= flat.y[begin + j]) continue;
          const double delta = std::abs(gain[begin + i] - gain[begin + j]) *
                               std::abs(discount(pos[i]) - discount(pos[j])) / max_dcg[gi];
          const double rho =
              cfg.sigma * delta * sigmoid(-cfg.sigma * (score[begin + i] - score[begin + j]));
          lambda[begin + i] += rho;
          lambda[begin + j] -= rho;
        }
      }
    }
    RegressionTree tree = fit_regression_tree(flat.x, lambda, tree_cfg);
    for (std::size_t i = 0; i < flat.x.size(); ++i)
      score[i] += ens.shrinkage * tree.predict(flat.x[i]);
    ens.trees.push_back(std::move(tree));
  }
  model.state = std::move(ens);
  model.config_echo = {{"stages", std::to_string(b.stages)},
                       {"max_leaves", std::to_string(b.max_leaves)},
                       {"min_leaf", std::to_string(b.min_leaf)},
                       {"shrinkage", fmt(b.shrinkage)},
                       {"sigma", fmt(cfg.sigma)}};
  return model;
}

RankerModel fit_rankboost(const LabeledSet& set, const PairSet& pairs,
                          const RankBoostConfig& cfg, const RankerModel* warm) {
  require_nonempty(set);
  if (cfg.rounds < 1 || cfg.thresholds_per_feature < 1)
    throw ConfigError("rankboost: invalid hyperparameters");
  if (pairs.pairs.empty()) throw DataError("rankboost: no preference pairs");
  const Flat flat = flatten(set);

  struct FlatPair {
    std::size_t hi, lo;
  };
  std::vector<FlatPair> fp(pairs.pairs.size());
  for (std::size_t p = 0; p < pairs.pairs.size(); ++p) {
    const IndexPair& ip = pairs.pairs[p];
    if (ip.group >= set.groups.size()) throw std::invalid_argument("pair group out of range");
    fp[p] = {flat.group_begin[ip.group] + ip.higher, flat.group_begin[ip.group] + ip.lower};
  }

  // Candidate thresholds: midpoints between consecutive distinct values,
  // evenly subsampled to the configured count.
  const std::size_t width = set.feature_width;
  std::vector<std::vector<double>> thresholds(width);
  for (std::size_t f = 0; f < width; ++f) {
    std::set<double> uniq;
    for (const auto& row : flat.x) uniq.insert(row[f]);
    std::vector<double> vals(uniq.begin(), uniq.end());
    if (vals.size() < 2) continue;
    std::vector<double> mids(vals.size() - 1);
    for (std::size_t t = 0; t + 1 < vals.size(); ++t) mids[t] = 0.5 * (vals[t] + vals[t + 1]);
    const std::size_t want = static_cast<std::size_t>(cfg.thresholds_per_feature);
    if (mids.size() <= want) {
      thresholds[f] = std::move(mids);
    } else {
      thresholds[f].reserve(want);
      for (std::size_t t = 0; t < want; ++t) {
        const std::size_t idx = (2 * t + 1) * mids.size() / (2 * want);
        thresholds[f].push_back(mids[std::min(idx, mids.size() - 1)]);
      }
      thresholds[f].erase(std::unique(thresholds[f].begin(), thresholds[f].end()),
                          thresholds[f].end());
    }
  }

  RankerModel model;
  model.kind = "rankboost";
  model.feature_width = width;
  BoostedThresholds boosted;
  if (warm != nullptr) {
    if (warm->kind != "rankboost" || warm->feature_width != width)
      throw std::invalid_argument("warm-start model does not match rankboost fit");
    boosted = std::get<BoostedThresholds>(warm->state);
  }

  std::vector<double> d(fp.size(), 1.0 / static_cast<double>(fp.size()));
  for (int round = 0; round < cfg.rounds; ++round) {
    double best_r = 0.0;
    int best_f = -1;
    double best_thr = 0.0;
    for (std::size_t f = 0; f < width; ++f) {
      for (double thr : thresholds[f]) {
        double r = 0.0;
        for (std::size_t p = 0; p < fp.size(); ++p) {
          const double hp = flat.x[fp[p].hi][f] > thr ? 1.0 : 0.0;
          const double hm = flat.x[fp[p].lo][f] > thr ? 1.0 : 0.0;
          r += d[p] * (hp - hm);
        }
        if (std::abs(r) > std::abs(best_r) + 1e-15) {
          best_r = r;
          best_f = static_cast<int>(f);
          best_thr = thr;
        }
      }
    }
    if (best_f < 0 || std::abs(best_r) < 1e-12) break;  // no weak ranker helps

    ThresholdRanker weak;
    weak.feature = best_f;
    weak.threshold = best_thr;
    weak.greater = best_r > 0.0;
    const double r = std::clamp(std::abs(best_r), 0.0, 1.0 - 1e-6);
    weak.alpha = 0.5 * std::log((1.0 + r) / (1.0 - r));

    double norm = 0.0;
    for (std::size_t p = 0; p < fp.size(); ++p) {
      const bool above_hi = flat.x[fp[p].hi][static_cast<std::size_t>(best_f)] > best_thr;
      const bool above_lo = flat.x[fp[p].lo][static_cast<std::size_t>(best_f)] > best_thr;
      const double hp = (above_hi == weak.greater) ? 1.0 : 0.0;
      const double hm = (above_lo == weak.greater) ? 1.0 : 0.0;
      d[p] *= std::exp(weak.alpha * (hm - hp));
      norm += d[p];
    }
    for (double& v : d) v /= norm;
    boosted.rankers.push_back(weak);
  }
  model.state = std::move(boosted);
  model.config_echo = {{"rounds", std::to_string(cfg.rounds)},
                       {"thresholds_per_feature", std::to_string(cfg.thresholds_per_feature)}};
  return model;
}

double ranknet_pair_loss(double s_plus, double s_minus) {
  // -log(sigmoid(d)) = log(1 + exp(-d)), computed stably.
  const double diff = s_plus - s_minus;
  if (diff > 0) return std::log1p(std::exp(-diff));
  return -diff + std::log1p(std::exp(diff));
}

RankerModel fit_ranknet(const LabeledSet& set, const PairSet& pairs, const RankNetConfig& cfg,
                        const RankerModel* warm) {
  require_nonempty(set);
  if (cfg.epochs < 0 || cfg.learning_rate <= 0.0)
    throw ConfigError("ranknet: invalid hyperparameters");
  if (pairs.pairs.empty()) throw DataError("ranknet: no preference pairs");
  const Flat flat = flatten(set);

  RankerModel model;
  model.kind = "ranknet";
  model.feature_width = set.feature_width;
  NetworkParams np;
  if (warm != nullptr) {
    if (warm->kind != "ranknet" || warm->feature_width != set.feature_width)
      throw std::invalid_argument("warm-start model does not match ranknet fit");
    np = std::get<NetworkParams>(warm->state);  // keeps the original scaler
  } else {
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(set.feature_width));
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(1);
    np.net = Mlp(std::move(sizes), Rng::mix(cfg.seed, 0x52414e4bULL));
    const Scaler sc = fit_scaler(flat.x, set.feature_width);
    np.feat_mean = sc.mean;
    np.feat_scale = sc.scale;
  }

  std::vector<std::vector<double>> z(flat.x.size());
  for (std::size_t i = 0; i < flat.x.size(); ++i)
    z[i] = standardized(flat.x[i], np.feat_mean, np.feat_scale);
  std::vector<std::size_t> flat_hi(pairs.pairs.size()), flat_lo(pairs.pairs.size());
  for (std::size_t p = 0; p < pairs.pairs.size(); ++p) {
    const IndexPair& ip = pairs.pairs[p];
    flat_hi[p] = flat.group_begin[ip.group] + ip.higher;
    flat_lo[p] = flat.group_begin[ip.group] + ip.lower;
  }

  Mlp::Workspace ws_hi, ws_lo;
  std::vector<double> grad(np.net.params().size(), 0.0);
  std::vector<std::size_t> order(pairs.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t global_epoch = static_cast<std::uint64_t>(np.epochs_trained) +
                                       static_cast<std::uint64_t>(epoch);
    Rng shuffle_rng(Rng::mix(cfg.seed, 0x45504f43ULL + global_epoch));
    // Reset to identity so each epoch's order depends on the epoch index
    // alone; resumed fits then replay the exact schedule of a full fit.
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    for (std::size_t p : order) {
      const double s_hi = np.net.forward(z[flat_hi[p]], ws_hi)[0];
      const double s_lo = np.net.forward(z[flat_lo[p]], ws_lo)[0];
      const double g = sigmoid(s_hi - s_lo) - 1.0;  // dloss/ds_hi; ds_lo is -g
      std::fill(grad.begin(), grad.end(), 0.0);
      const double dhi[1] = {g};
      const double dlo[1] = {-g};
      np.net.backward(ws_hi, dhi, grad);
      np.net.backward(ws_lo, dlo, grad);
      np.net.apply_delta(grad, -cfg.learning_rate);
    }
  }
  np.epochs_trained += cfg.epochs;

  model.state = std::move(np);
  model.config_echo = {{"hidden", std::to_string(cfg.hidden.empty() ? 0 : cfg.hidden[0])},
                       {"epochs", std::to_string(cfg.epochs)},
                       {"learning_rate", fmt(cfg.learning_rate)},
                       {"seed", std::to_string(cfg.seed)}};
  return model;
}

RankerModel fit_coordinate_ascent(const LabeledSet& set, const CoordinateAscentConfig& cfg,
                                  const RankerModel* warm) {
  require_nonempty(set);
  if (cfg.restarts < 1 || cfg.sweeps < 1 || cfg.grid_span < 1)
    throw ConfigError("coordinate_ascent: invalid hyperparameters");
  bool any_failing = false;
  for (const auto& g : set.groups) {
    for (double v : g.y)
      if (v > 0.5) {
        any_failing = true;
        break;
      }
    if (any_failing) break;
  }
  if (!any_failing)
    throw DataError("coordinate_ascent: objective undefined without a failing training cycle");

  const Flat flat = flatten(set);
  const std::size_t width = set.feature_width;

  Scaler sc;
  if (warm != nullptr) {
    if (warm->kind != "coordinate_ascent" || warm->feature_width != width)
      throw std::invalid_argument("warm-start model does not match coordinate_ascent fit");
    const auto& lw = std::get<LinearWeights>(warm->state);
    sc.mean = lw.feat_mean;
    sc.scale = lw.feat_scale;
  } else {
    sc = fit_scaler(flat.x, width);
  }
  std::vector<LabeledSet::Group> zgroups(set.groups.size());
  for (std::size_t gi = 0; gi < set.groups.size(); ++gi) {
    zgroups[gi].y = set.groups[gi].y;
    zgroups[gi].x.reserve(set.groups[gi].x.size());
    for (const auto& row : set.groups[gi].x)
      zgroups[gi].x.push_back(standardized(row, sc.mean, sc.scale));
  }

  const auto objective = [&](const std::vector<double>& w) {
    double total = 0.0;
    std::size_t failing = 0;
    std::vector<double> scores;
    for (const auto& g : zgroups) {
      bool has_fail = false;
      for (double v : g.y)
        if (v > 0.5) {
          has_fail = true;
          break;
        }
      if (!has_fail) continue;
      scores.resize(g.x.size());
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) acc += w[j] * g.x[i][j];
        scores[i] = acc;
      }
      total += rapfd_from_labels(RankedSequence::from_scores(scores).order, g.y);
      ++failing;
    }
    return total / static_cast<double>(failing);
  };

  std::vector<double> best_w;
  double best_obj = -1.0;
  Rng rng(Rng::mix(cfg.seed, 0x434f4f52ULL));
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::vector<double> w(width, 0.0);
    if (warm != nullptr && restart == 0) {
      w = std::get<LinearWeights>(warm->state).w;
    } else if (restart == 0) {
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(width));
    } else {
      for (double& v : w) v = rng.uniform(-1.0, 1.0);
    }
    double cur = objective(w);
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
      bool moved = false;
      for (std::size_t dcoord = 0; dcoord < width; ++dcoord) {
        const double incumbent = w[dcoord];
        const double base = incumbent != 0.0 ? std::abs(incumbent) : 1.0;
        double best_v = incumbent;
        double best_local = cur;
        for (int k = -cfg.grid_span; k <= cfg.grid_span; ++k) {
          const double mag = base * std::exp2(static_cast<double>(k));
          for (const double cand : {mag, -mag}) {
            w[dcoord] = cand;
            const double obj = objective(w);
            if (obj > best_local + 1e-12) {  // strict improvement, ties keep incumbent
              best_local = obj;
              best_v = cand;
            }
          }
        }
        w[dcoord] = best_v;
        if (best_v != incumbent) {
          cur = best_local;
          moved = true;
        }
      }
      if (!moved) break;
    }
    if (cur > best_obj) {
      best_obj = cur;
      best_w = w;
    }
  }

  RankerModel model;
  model.kind = "coordinate_ascent";
  model.feature_width = width;
  LinearWeights lw;
  lw.w = std::move(best_w);
  lw.feat_mean = std::move(sc.mean);
  lw.feat_scale = std::move(sc.scale);
  model.state = std::move(lw);
  model.config_echo = {{"restarts", std::to_string(cfg.restarts)},
                       {"sweeps", std::to_string(cfg.sweeps)},
                       {"grid_span", std::to_string(cfg.grid_span)},
                       {"seed", std::to_string(cfg.seed)}};
  return model;
}

RankerModel fit_deeporder(const LabeledSet& set, const DeepOrderConfig& cfg,
                          const RankerModel* warm) {
  require_nonempty(set);
  if (cfg.epochs < 0 || cfg.learning_rate <= 0.0)
    throw ConfigError("deeporder: invalid hyperparameters");
  const Flat flat = flatten(set);

  RankerModel model;
  model.kind = "deeporder";
  model.feature_width = set.feature_width;
  NetworkParams np;
  if (warm != nullptr) {
    if (warm->kind != "deeporder" || warm->feature_width != set.feature_width)
      throw std::invalid_argument("warm-start model does not match deeporder fit");
    np = std::get<NetworkParams>(warm->state);
  } else {
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(set.feature_width));
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(1);
    np.net = Mlp(std::move(sizes), Rng::mix(cfg.seed, 0x4445455045ULL));
    const Scaler sc = fit_scaler(flat.x, set.feature_width);
    np.feat_mean = sc.mean;
    np.feat_scale = sc.scale;
  }

  std::vector<std::vector<double>> z(flat.x.size());
  for (std::size_t i = 0; i < flat.x.size(); ++i)
    z[i] = standardized(flat.x[i], np.feat_mean, np.feat_scale);

  Mlp::Workspace ws;
  std::vector<double> grad(np.net.params().size(), 0.0);
  std::vector<std::size_t> order(flat.x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t global_epoch = static_cast<std::uint64_t>(np.epochs_trained) +
                                       static_cast<std::uint64_t>(epoch);
    Rng shuffle_rng(Rng::mix(cfg.seed, 0x444f4550ULL + global_epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    for (std::size_t i : order) {
      const double s = np.net.forward(z[i], ws)[0];
      const double dloss[1] = {2.0 * (s - flat.y[i])};  // d/ds (s - y)^2
      std::fill(grad.begin(), grad.end(), 0.0);
      np.net.backward(ws, dloss, grad);
      np.net.apply_delta(grad, -cfg.learning_rate);
    }
  }
  np.epochs_trained += cfg.epochs;

  model.state = std::move(np);
  model.config_echo = {{"hidden_layers", std::to_string(cfg.hidden.size())},
                       {"epochs", std::to_string(cfg.epochs)},
                       {"learning_rate", fmt(cfg.learning_rate)},
                       {"seed", std::to_string(cfg.seed)}};
  return model;
}

RankedSequence score_cycle(const RankerModel& model,
                           const std::vector<std::vector<double>>& cycle_features) {
  std::vector<double> scores(cycle_features.size());
  for (std::size_t i = 0; i < cycle_features.size(); ++i) {
    if (cycle_features[i].size() != model.feature_width)
      throw std::invalid_argument("score_cycle: feature width mismatch");
    scores[i] = model.score(cycle_features[i]);
  }
  return RankedSequence::from_scores(std::move(scores));
}

}  // namespace citcp
