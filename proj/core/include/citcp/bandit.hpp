#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "citcp/subject.hpp"

namespace citcp {

// Fitness-rate-rank multi-armed bandit over test ids. Each arm keeps a
// sliding reward window; credit is assigned by ranking arms on their window
// sums with geometric decay, and selection adds a UCB-style exploration
// term.
struct FrrmabConfig {
  int window = 100;       // W, sliding window length per arm
  double scale_c = 0.5;   // exploration scaling C
  double decay_d = 1.0;   // rank decay D in (0, 1]
};

struct BanditArm {
  std::int64_t plays = 0;
  std::deque<double> window;
  double frr = 0.0;         // decayed, normalized credit
  double expected_gain = 0.0;  // window mean Q

  double window_sum() const;
};

struct BanditState {
  FrrmabConfig cfg;
  std::vector<std::string> arm_order;  // first-seen order, fixes rank ties
  std::unordered_map<std::string, BanditArm> arms;
  std::int64_t total_plays = 0;

  const BanditArm* find(const std::string& id) const;
};

// Orders candidates by FRR_i + C*sqrt(2*ln(total plays)/n_i); arms never
// played come first (forced exploration), keeping candidate order among
// themselves. Does not mutate state.
RankedSequence frrmab_select(const BanditState& state, const std::vector<std::string>& candidates);

// Appends one reward per candidate (same order as the cycle's records),
// evicts beyond the window, then recomputes credit and expected gain for
// every arm.
void frrmab_update(BanditState& state, const std::vector<std::string>& candidates,
                   const std::vector<double>& rewards);

}  // namespace citcp
