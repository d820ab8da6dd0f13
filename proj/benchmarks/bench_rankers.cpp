#include <benchmark/benchmark.h>

#include "citcp/features.hpp"
#include "citcp/harness.hpp"
#include "citcp/sl_rankers.hpp"
#include "citcp/synth.hpp"

namespace {

using namespace citcp;

struct Fixture {
  Subject subject;
  FeatureMatrix features;
  LabeledSet train;

  explicit Fixture(int cycles) {
    SynthConfig cfg;
    cfg.cycles = cycles;
    cfg.tests_per_cycle = 20;
    cfg.failure_rate_target = 0.1;
    cfg.seed = 5;
    subject = generate_synthetic(cfg);
    features = build_features(subject, FeatureSchema::for_family(FeatureFamily::bertolino_rl_family));
    train = build_labeled_set(subject, features, 0, subject.cycles.size(), false);
  }
};

void bm_fit_mart(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  MartConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_mart(fx.train, cfg, nullptr));
  }
}
BENCHMARK(bm_fit_mart)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_fit_rankboost(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  const PairSet pairs = make_pairs(fx.train);
  RankBoostConfig cfg;
  cfg.rounds = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_rankboost(fx.train, pairs, cfg, nullptr));
  }
}
BENCHMARK(bm_fit_rankboost)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_score_cycle(benchmark::State& state) {
  const Fixture fx(50);
  MartConfig cfg;
  const RankerModel model = fit_mart(fx.train, cfg, nullptr);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_cycle(model, fx.features.values.back()));
  }
}
BENCHMARK(bm_score_cycle);

}  // namespace
