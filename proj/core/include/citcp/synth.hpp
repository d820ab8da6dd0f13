#pragma once

#include <cstdint>
#include <string>

#include "citcp/subject.hpp"

namespace citcp {

// Synthetic CI histories with a controllable failure signal. Each test gets a
// persistent latent trait; per execution it fails with probability
// sigmoid(signal_strength * trait + bias), where bias is calibrated so the
// expected failure rate matches failure_rate_target. signal_strength = 0
// makes failures pure noise; large values make them nearly deterministic
// functions of the trait, which is also exported as a feature column.
struct SynthConfig {
  std::string name = "synthetic";
  int cycles = 100;
  int tests_per_cycle = 20;
  // 0 means every cycle runs the same tests_per_cycle tests. A larger pool
  // draws each cycle's suite from `test_pool` distinct tests, so unseen
  // tests keep appearing late in the history.
  int test_pool = 0;
  double failure_rate_target = 0.05;
  double signal_strength = 4.0;
  double duration_lo_s = 0.5;
  double duration_hi_s = 10.0;
  double commit_interval_mean_s = 3600.0;
  std::uint64_t seed = 1;
};

// Throws ConfigError on out-of-range settings. Same config => identical
// subject, byte for byte.
Subject generate_synthetic(const SynthConfig& cfg);

}  // namespace citcp
