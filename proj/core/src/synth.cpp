#include "citcp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "citcp/errors.hpp"
#include "citcp/rng.hpp"

namespace citcp {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Bias b such that mean_i sigmoid(a_i + b) == target. Monotone in b, so
// bisection over a generous bracket converges to machine precision.
double calibrate_bias(const std::vector<double>& activations, double target) {
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double a : activations) mean += sigmoid(a + mid);
    mean /= static_cast<double>(activations.size());
    if (mean < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Subject generate_synthetic(const SynthConfig& cfg) {
  if (cfg.cycles < 2) throw ConfigError("synthetic: cycles must be >= 2");
  if (cfg.tests_per_cycle < 1) throw ConfigError("synthetic: tests_per_cycle must be >= 1");
  if (cfg.test_pool != 0 && cfg.test_pool < cfg.tests_per_cycle)
    throw ConfigError("synthetic: test_pool must be 0 or >= tests_per_cycle");
  if (!(cfg.failure_rate_target > 0.0 && cfg.failure_rate_target < 1.0))
    throw ConfigError("synthetic: failure_rate_target must be in (0, 1)");
  if (cfg.signal_strength < 0.0) throw ConfigError("synthetic: signal_strength must be >= 0");
  if (cfg.duration_lo_s < 0.0 || cfg.duration_hi_s < cfg.duration_lo_s)
    throw ConfigError("synthetic: duration range must satisfy 0 <= lo <= hi");
  if (cfg.commit_interval_mean_s <= 0.0)
    throw ConfigError("synthetic: commit_interval_mean_s must be positive");

  const int pool = (cfg.test_pool == 0) ? cfg.tests_per_cycle : cfg.test_pool;
  Rng rng(cfg.seed);

  std::vector<std::string> ids(pool);
  std::vector<double> trait(pool), base_duration(pool), activation(pool);
  for (int i = 0; i < pool; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%04d", i);
    ids[i] = buf;
    trait[i] = rng.normal();
    base_duration[i] = rng.uniform(cfg.duration_lo_s, cfg.duration_hi_s);
    activation[i] = cfg.signal_strength * trait[i];
  }
  const double bias = calibrate_bias(activation, cfg.failure_rate_target);

  Subject subject;
  subject.name = cfg.name;
  subject.feature_names = {"trait"};
  subject.cycles.reserve(cfg.cycles);

  const double jitter = 0.05 * (cfg.duration_hi_s - cfg.duration_lo_s);
  std::int64_t ts = 0;
  std::vector<int> pick(pool);
  std::iota(pick.begin(), pick.end(), 0);
  for (int c = 0; c < cfg.cycles; ++c) {
    ts += std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(rng.exponential(cfg.commit_interval_mean_s))));
    Cycle cycle;
    cycle.cycle_id = c + 1;
    cycle.commit_timestamp = ts;

    // Partial Fisher-Yates picks the suite; sorting restores stable identity
    // order so the schedule does not leak sampling order.
    for (int j = 0; j < cfg.tests_per_cycle; ++j) {
      const std::size_t r = j + rng.below(pool - j);
      std::swap(pick[j], pick[r]);
    }
    std::sort(pick.begin(), pick.begin() + cfg.tests_per_cycle);

    cycle.records.reserve(cfg.tests_per_cycle);
    for (int j = 0; j < cfg.tests_per_cycle; ++j) {
      const int i = pick[j];
      TestRecord rec;
      rec.test_id = ids[i];
      rec.duration_s = std::clamp(base_duration[i] + rng.uniform(-jitter, jitter),
                                  cfg.duration_lo_s, cfg.duration_hi_s);
      rec.verdict =
          rng.uniform() < sigmoid(activation[i] + bias) ? Verdict::fail : Verdict::pass;
      rec.features = {trait[i]};
      cycle.records.push_back(std::move(rec));
    }
    subject.cycles.push_back(std::move(cycle));
  }
  return subject;
}

}  // namespace citcp
