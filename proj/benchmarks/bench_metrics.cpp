#include <benchmark/benchmark.h>

#include "citcp/metrics.hpp"
#include "citcp/rng.hpp"
#include "citcp/synth.hpp"

namespace {

using namespace citcp;

Cycle make_cycle(std::size_t tests, std::uint64_t seed) {
  Rng rng(seed);
  Cycle cycle;
  cycle.cycle_id = 1;
  cycle.commit_timestamp = 1000;
  cycle.records.reserve(tests);
  for (std::size_t i = 0; i < tests; ++i) {
    TestRecord rec;
    rec.test_id = "t" + std::to_string(i);
    rec.duration_s = rng.uniform(0.5, 10.0);
    rec.verdict = rng.uniform() < 0.2 ? Verdict::fail : Verdict::pass;
    cycle.records.push_back(std::move(rec));
  }
  if (cycle.fail_count() == 0) cycle.records.front().verdict = Verdict::fail;
  return cycle;
}

RankedSequence random_sequence(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> scores(n);
  for (double& s : scores) s = rng.uniform();
  return RankedSequence::from_scores(std::move(scores));
}

void bm_evaluate_cycle(benchmark::State& state) {
  const std::size_t tests = static_cast<std::size_t>(state.range(0));
  const Cycle cycle = make_cycle(tests, 7);
  const RankedSequence seq = random_sequence(tests, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_cycle(seq, cycle));
  }
}
BENCHMARK(bm_evaluate_cycle)->Arg(20)->Arg(200)->Arg(2000);

void bm_nrpa(benchmark::State& state) {
  const std::size_t tests = static_cast<std::size_t>(state.range(0));
  const Cycle cycle = make_cycle(tests, 13);
  const RankedSequence seq = random_sequence(tests, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nrpa(seq, cycle));
  }
}
BENCHMARK(bm_nrpa)->Arg(20)->Arg(200)->Arg(2000);

void bm_generate_synthetic(benchmark::State& state) {
  SynthConfig cfg;
  cfg.cycles = static_cast<int>(state.range(0));
  cfg.tests_per_cycle = 20;
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_synthetic(cfg));
  }
}
BENCHMARK(bm_generate_synthetic)->Arg(50)->Arg(200);

}  // namespace
