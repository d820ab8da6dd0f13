#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "citcp/errors.hpp"
#include "citcp/rng.hpp"
#include "citcp/sl_rankers.hpp"
#include "doctest.h"

using namespace citcp;

namespace {

LabeledSet set_of(std::vector<std::vector<std::vector<double>>> xs,
                  std::vector<std::vector<double>> ys) {
  LabeledSet set;
  set.feature_width = xs.front().front().size();
  for (std::size_t g = 0; g < xs.size(); ++g)
    set.groups.push_back({std::move(xs[g]), std::move(ys[g])});
  return set;
}

// One-feature set where the label is 1 iff the feature is positive.
LabeledSet separable_set(Rng& rng, std::size_t groups, std::size_t per_group) {
  std::vector<std::vector<std::vector<double>>> xs(groups);
  std::vector<std::vector<double>> ys(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < per_group; ++i) {
      const double v = rng.uniform(-1.0, 1.0);
      xs[g].push_back({v, rng.uniform(-1.0, 1.0)});
      ys[g].push_back(v > 0.0 ? 1.0 : 0.0);
    }
    // Guarantee both labels in each group.
    xs[g].push_back({0.5, 0.0});
    ys[g].push_back(1.0);
    xs[g].push_back({-0.5, 0.0});
    ys[g].push_back(0.0);
  }
  return set_of(std::move(xs), std::move(ys));
}

double train_mse(const RankerModel& m, const LabeledSet& set) {
  double sse = 0.0;
  std::size_t n = 0;
  for (const auto& g : set.groups)
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double d = m.score(g.x[i]) - g.y[i];
      sse += d * d;
      ++n;
    }
  return sse / static_cast<double>(n);
}

double ordered_fraction(const RankerModel& m, const LabeledSet& set) {
  std::size_t good = 0, total = 0;
  for (const auto& g : set.groups)
    for (std::size_t i = 0; i < g.x.size(); ++i)
      for (std::size_t j = 0; j < g.x.size(); ++j) {
        if (g.y[i] <= g.y[j]) continue;
        ++total;
        if (m.score(g.x[i]) > m.score(g.x[j])) ++good;
      }
  return total == 0 ? 1.0 : static_cast<double>(good) / static_cast<double>(total);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto rank_of = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t p = 0; p < idx.size(); ++p) r[idx[p]] = static_cast<double>(p);
    return r;
  };
  const auto ra = rank_of(a), rb = rank_of(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("make_pairs stays within groups and crosses label values only") {
  auto one = set_of({{{1.0}, {2.0}, {3.0}}}, {{1.0, 0.0, 0.0}});
  auto p1 = make_pairs(one);
  REQUIRE(p1.pairs.size() == 2);
  for (const auto& ip : p1.pairs) {
    CHECK(ip.group == 0);
    CHECK(ip.higher == 0);
    CHECK(one.groups[0].y[ip.higher] > one.groups[0].y[ip.lower]);
  }

  auto two = set_of({{{1.0}, {2.0}}, {{3.0}, {4.0}}}, {{1.0, 0.0}, {1.0, 0.0}});
  auto p2 = make_pairs(two);
  REQUIRE(p2.pairs.size() == 2);
  CHECK(p2.pairs[0].group != p2.pairs[1].group);

  auto flat_labels = set_of({{{1.0}, {2.0}, {3.0}}}, {{1.0, 1.0, 1.0}});
  CHECK(make_pairs(flat_labels).pairs.empty());

  // Graded labels pair every distinct value combination.
  auto graded = set_of({{{1.0}, {2.0}, {3.0}}}, {{3.0, 1.0, 2.0}});
  CHECK(make_pairs(graded).pairs.size() == 3);
}

TEST_CASE("pointwise boosting with zero stages predicts the mean label") {
  auto set = set_of({{{1.0}, {2.0}, {3.0}, {4.0}}}, {{1.0, 0.0, 0.0, 0.0}});
  MartConfig cfg;
  cfg.stages = 0;
  auto m = fit_mart(set, cfg);
  CHECK(m.score(std::vector<double>{99.0}) == doctest::Approx(0.25));
  CHECK(m.score(std::vector<double>{-5.0}) == doctest::Approx(0.25));
}

TEST_CASE("pointwise boosting drives training error down monotonically") {
  Rng rng(5);
  auto set = separable_set(rng, 4, 10);
  double prev = std::numeric_limits<double>::infinity();
  for (int stages : {0, 1, 2, 4, 8, 16}) {
    MartConfig cfg;
    cfg.stages = stages;
    cfg.max_leaves = 4;
    const double mse = train_mse(fit_mart(set, cfg), set);
    CHECK(mse <= prev + 1e-12);
    prev = mse;
  }
  // Enough stages separate the classes.
  MartConfig cfg;
  cfg.stages = 40;
  cfg.max_leaves = 4;
  CHECK(ordered_fraction(fit_mart(set, cfg), set) >= 0.95);
}

TEST_CASE("warm-started boosting extends the same ensemble") {
  Rng rng(6);
  auto set = separable_set(rng, 3, 8);
  MartConfig five;
  five.stages = 5;
  MartConfig ten = five;
  ten.stages = 10;
  auto half = fit_mart(set, five);
  auto resumed = fit_mart(set, five, &half);
  auto full = fit_mart(set, ten);
  for (const auto& g : set.groups)
    for (const auto& row : g.x)
      CHECK(resumed.score(row) == doctest::Approx(full.score(row)).epsilon(1e-12));
  CHECK(std::get<TreeEnsemble>(resumed.state).trees.size() == 10);
}

TEST_CASE("pairwise boosting leaves equal-label sets at the base score") {
  auto set = set_of({{{1.0}, {5.0}, {9.0}}}, {{1.0, 1.0, 1.0}});
  LambdaMartConfig cfg;
  cfg.boost.stages = 3;
  auto m = fit_lambdamart(set, cfg);
  CHECK(m.score(std::vector<double>{1.0}) == doctest::Approx(0.0));
  CHECK(m.score(std::vector<double>{9.0}) == doctest::Approx(0.0));
}

TEST_CASE("one pairwise boosting stage on two points has a closed-form gap") {
  // Two instances, one relevant: the first stage fits the swap-in-gain
  // gradient exactly, so the score gap is sigma * (1 - 1/log2(3)).
  for (double sigma : {1.0, 2.0}) {
    auto set = set_of({{{1.0}, {0.0}}}, {{1.0, 0.0}});
    LambdaMartConfig cfg;
    cfg.boost.stages = 1;
    cfg.boost.shrinkage = 1.0;
    cfg.boost.max_leaves = 2;
    cfg.sigma = sigma;
    auto m = fit_lambdamart(set, cfg);
    const double gap = m.score(std::vector<double>{1.0}) - m.score(std::vector<double>{0.0});
    const double expect = sigma * (1.0 - 1.0 / std::log2(3.0));
    CHECK(gap == doctest::Approx(expect).epsilon(1e-12));
  }
  // sigma = 1: the gap is about 0.369.
  auto set = set_of({{{1.0}, {0.0}}}, {{1.0, 0.0}});
  LambdaMartConfig cfg;
  cfg.boost.stages = 1;
  cfg.boost.shrinkage = 1.0;
  auto m = fit_lambdamart(set, cfg);
  CHECK(m.score(std::vector<double>{1.0}) - m.score(std::vector<double>{0.0}) ==
        doctest::Approx(0.36907).epsilon(1e-4));
}

TEST_CASE("pairwise boosting orders a separable problem") {
  Rng rng(7);
  auto set = separable_set(rng, 4, 10);
  LambdaMartConfig cfg;
  cfg.boost.stages = 30;
  cfg.boost.max_leaves = 4;
  auto m = fit_lambdamart(set, cfg, nullptr);
  CHECK(ordered_fraction(m, set) >= 0.95);
}

TEST_CASE("threshold boosting saturates its vote weight on a clean pair") {
  auto set = set_of({{{1.0}, {0.0}}}, {{1.0, 0.0}});
  auto pairs = make_pairs(set);
  RankBoostConfig cfg;
  cfg.rounds = 1;
  auto m = fit_rankboost(set, pairs, cfg);
  const auto& boosted = std::get<BoostedThresholds>(m.state);
  REQUIRE(boosted.rankers.size() == 1);
  // Perfect agreement clamps the correlation just below 1.
  const double r = 1.0 - 1e-6;
  const double expect = 0.5 * std::log((1.0 + r) / (1.0 - r));
  CHECK(boosted.rankers[0].alpha == doctest::Approx(expect).epsilon(1e-12));
  CHECK(boosted.rankers[0].alpha == doctest::Approx(7.25433).epsilon(1e-5));
  CHECK(m.score(std::vector<double>{1.0}) > m.score(std::vector<double>{0.0}));
}

TEST_CASE("threshold boosting adds nothing when no threshold correlates") {
  // Labels flip for identical feature values, so every candidate threshold
  // has zero weighted correlation and boosting stops immediately.
  auto set = set_of({{{1.0}, {1.0}, {0.0}, {0.0}}}, {{1.0, 0.0, 1.0, 0.0}});
  auto pairs = make_pairs(set);
  RankBoostConfig cfg;
  cfg.rounds = 10;
  auto m = fit_rankboost(set, pairs, cfg);
  CHECK(std::get<BoostedThresholds>(m.state).rankers.empty());
  CHECK(m.score(std::vector<double>{1.0}) == m.score(std::vector<double>{0.0}));
}

TEST_CASE("threshold boosting orders a separable problem") {
  Rng rng(8);
  auto set = separable_set(rng, 4, 10);
  auto m = fit_rankboost(set, make_pairs(set), RankBoostConfig{});
  CHECK(ordered_fraction(m, set) >= 0.95);
}

TEST_CASE("pair loss is ln 2 at tied scores and matches finite differences") {
  CHECK(ranknet_pair_loss(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(ranknet_pair_loss(3.0, 3.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // Large gaps approach zero loss from above.
  CHECK(ranknet_pair_loss(30.0, 0.0) < 1e-12);
  CHECK(ranknet_pair_loss(0.0, 30.0) > 29.0);

  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const double sp = rng.uniform(-3, 3), sm = rng.uniform(-3, 3);
    const double eps = 1e-6;
    const double fd = (ranknet_pair_loss(sp + eps, sm) - ranknet_pair_loss(sp - eps, sm)) /
                      (2 * eps);
    const double analytic = 1.0 / (1.0 + std::exp(-(sp - sm))) - 1.0;
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    // Loss is antisymmetric in its gradient: d/ds_minus = -d/ds_plus.
    const double fd_m = (ranknet_pair_loss(sp, sm + eps) - ranknet_pair_loss(sp, sm - eps)) /
                        (2 * eps);
    CHECK(fd_m == doctest::Approx(-fd).epsilon(1e-5));
  }
}

TEST_CASE("pairwise network training orders a separable problem") {
  Rng rng(10);
  auto set = separable_set(rng, 5, 12);
  RankNetConfig cfg;
  cfg.epochs = 60;
  cfg.learning_rate = 0.05;
  auto m = fit_ranknet(set, make_pairs(set), cfg);
  CHECK(ordered_fraction(m, set) >= 0.95);
}

TEST_CASE("network fits resumed halfway equal one full fit") {
  Rng rng(11);
  auto set = separable_set(rng, 3, 8);
  auto pairs = make_pairs(set);

  RankNetConfig half;
  half.epochs = 20;
  RankNetConfig full = half;
  full.epochs = 40;
  auto first = fit_ranknet(set, pairs, half);
  auto resumed = fit_ranknet(set, pairs, half, &first);
  auto straight = fit_ranknet(set, pairs, full);
  const auto& a = std::get<NetworkParams>(resumed.state);
  const auto& b = std::get<NetworkParams>(straight.state);
  REQUIRE(a.net.params().size() == b.net.params().size());
  for (std::size_t p = 0; p < a.net.params().size(); ++p)
    CHECK(a.net.params()[p] == doctest::Approx(b.net.params()[p]).epsilon(1e-12));
  CHECK(a.epochs_trained == 40);

  DeepOrderConfig dhalf;
  dhalf.epochs = 15;
  dhalf.hidden = {8};
  DeepOrderConfig dfull = dhalf;
  dfull.epochs = 30;
  auto d1 = fit_deeporder(set, dhalf);
  auto d2 = fit_deeporder(set, dhalf, &d1);
  auto d3 = fit_deeporder(set, dfull);
  const auto& da = std::get<NetworkParams>(d2.state);
  const auto& db = std::get<NetworkParams>(d3.state);
  for (std::size_t p = 0; p < da.net.params().size(); ++p)
    CHECK(da.net.params()[p] == doctest::Approx(db.net.params()[p]).epsilon(1e-12));
}

TEST_CASE("linear ascent finds the verdict-aligned weight") {
  // Feature 0 equals the verdict; feature 1 is noise.
  Rng rng(12);
  std::vector<std::vector<std::vector<double>>> xs(4);
  std::vector<std::vector<double>> ys(4);
  for (std::size_t g = 0; g < 4; ++g) {
    for (int i = 0; i < 10; ++i) {
      const double label = (i % 5 == 0) ? 1.0 : 0.0;
      xs[g].push_back({label, rng.uniform(-1, 1)});
      ys[g].push_back(label);
    }
  }
  auto set = set_of(std::move(xs), std::move(ys));
  CoordinateAscentConfig cfg;
  auto m = fit_coordinate_ascent(set, cfg);
  CHECK(ordered_fraction(m, set) == doctest::Approx(1.0));
  const auto& lw = std::get<LinearWeights>(m.state);
  CHECK(lw.w[0] > 0.0);

  // Scaling a feature column by 10 everywhere leaves orderings unchanged.
  LabeledSet scaled = set;
  for (auto& g : scaled.groups)
    for (auto& row : g.x) row[1] *= 10.0;
  auto ms = fit_coordinate_ascent(scaled, cfg);
  for (std::size_t g = 0; g < set.groups.size(); ++g) {
    std::vector<double> s1, s2;
    for (std::size_t i = 0; i < set.groups[g].x.size(); ++i) {
      s1.push_back(m.score(set.groups[g].x[i]));
      s2.push_back(ms.score(scaled.groups[g].x[i]));
    }
    CHECK(RankedSequence::from_scores(s1).order == RankedSequence::from_scores(s2).order);
  }
}

TEST_CASE("linear ascent needs at least one failing training cycle") {
  auto set = set_of({{{1.0}, {2.0}}}, {{0.0, 0.0}});
  CHECK_THROWS_AS(fit_coordinate_ascent(set, CoordinateAscentConfig{}), DataError);
}

TEST_CASE("pointwise regression tracks its numeric labels") {
  // All-zero labels keep outputs near zero.
  Rng rng(13);
  std::vector<std::vector<std::vector<double>>> xs(1);
  std::vector<std::vector<double>> ys(1);
  for (int i = 0; i < 20; ++i) {
    xs[0].push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    ys[0].push_back(0.0);
  }
  auto zeros = set_of(std::move(xs), std::move(ys));
  DeepOrderConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 80;
  cfg.learning_rate = 0.02;
  auto mz = fit_deeporder(zeros, cfg);
  for (const auto& row : zeros.groups[0].x)
    CHECK(std::abs(mz.score(row)) < 0.05);

  // Labels monotone in one feature: predicted ranking correlates strongly.
  std::vector<std::vector<std::vector<double>>> mx(1);
  std::vector<std::vector<double>> my(1);
  std::vector<double> labels;
  for (int i = 0; i < 30; ++i) {
    const double v = rng.uniform(-1, 1);
    mx[0].push_back({v, rng.uniform(-1, 1)});
    my[0].push_back(0.5 * v + 0.5);
    labels.push_back(0.5 * v + 0.5);
  }
  auto mono = set_of(std::move(mx), std::move(my));
  auto mm = fit_deeporder(mono, cfg);
  std::vector<double> predicted;
  for (const auto& row : mono.groups[0].x) predicted.push_back(mm.score(row));
  CHECK(spearman(predicted, labels) >= 0.9);
}

TEST_CASE("score_cycle ranks by descending score with input-order ties") {
  auto set = set_of({{{1.0}, {2.0}}}, {{1.0, 0.0}});
  MartConfig constant;
  constant.stages = 0;
  auto flat = fit_mart(set, constant);
  auto seq = score_cycle(flat, {{5.0}, {1.0}, {3.0}});
  CHECK(seq.order == std::vector<std::size_t>{0, 1, 2});

  // Equivariance: permuting input rows permutes the schedule consistently.
  Rng rng(14);
  auto train = separable_set(rng, 3, 8);
  MartConfig cfg;
  cfg.stages = 20;
  cfg.max_leaves = 4;
  auto m = fit_mart(train, cfg);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 7; ++i) rows.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
  auto base = score_cycle(m, rows);
  std::vector<std::size_t> perm = {3, 0, 6, 1, 5, 2, 4};
  std::vector<std::vector<double>> shuffled;
  for (auto p : perm) shuffled.push_back(rows[p]);
  auto moved = score_cycle(m, shuffled);
  // Position of the same underlying row must be identical when scores are
  // distinct.
  for (std::size_t new_idx = 0; new_idx < perm.size(); ++new_idx)
    CHECK(moved.scores[new_idx] == doctest::Approx(base.scores[perm[new_idx]]));

  CHECK_THROWS_AS(score_cycle(m, {{1.0, 2.0, 3.0}}), std::invalid_argument);
}

TEST_CASE("models survive a save and load round trip") {
  Rng rng(15);
  auto set = separable_set(rng, 3, 8);
  auto pairs = make_pairs(set);

  MartConfig mart_cfg;
  mart_cfg.stages = 10;
  LambdaMartConfig lm_cfg;
  lm_cfg.boost.stages = 10;
  RankNetConfig rn_cfg;
  rn_cfg.epochs = 10;
  CoordinateAscentConfig ca_cfg;
  ca_cfg.restarts = 2;
  ca_cfg.sweeps = 5;
  DeepOrderConfig do_cfg;
  do_cfg.hidden = {6};
  do_cfg.epochs = 10;

  std::vector<RankerModel> models;
  models.push_back(fit_mart(set, mart_cfg));
  models.push_back(fit_lambdamart(set, lm_cfg));
  models.push_back(fit_rankboost(set, pairs, RankBoostConfig{}));
  models.push_back(fit_ranknet(set, pairs, rn_cfg));
  models.push_back(fit_coordinate_ascent(set, ca_cfg));
  models.push_back(fit_deeporder(set, do_cfg));

  std::vector<std::vector<double>> probes;
  for (int i = 0; i < 25; ++i) probes.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});

  for (const auto& m : models) {
    std::ostringstream out;
    save_model(m, out);
    std::istringstream in(out.str());
    auto back = load_model(in, "roundtrip");
    CHECK(back.kind == m.kind);
    CHECK(back.feature_width == m.feature_width);
    for (const auto& p : probes) CHECK(back.score(p) == m.score(p));
  }

  std::istringstream junk("not json at all");
  CHECK_THROWS_AS(load_model(junk, "junk"), DataError);
  std::istringstream wrong(R"({"kind":"alien","feature_width":1})");
  CHECK_THROWS_AS(load_model(wrong, "wrong"), DataError);
}

TEST_CASE("empty training sets are rejected") {
  LabeledSet empty;
  empty.feature_width = 2;
  CHECK_THROWS_AS(fit_mart(empty, MartConfig{}), DataError);
  CHECK_THROWS_AS(fit_deeporder(empty, DeepOrderConfig{}), DataError);
  auto no_pairs = set_of({{{1.0}}}, {{1.0}});
  CHECK_THROWS_AS(fit_ranknet(no_pairs, make_pairs(no_pairs), RankNetConfig{}), DataError);
  CHECK_THROWS_AS(fit_rankboost(no_pairs, make_pairs(no_pairs), RankBoostConfig{}), DataError);
}
