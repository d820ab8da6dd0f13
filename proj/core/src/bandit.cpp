#include "citcp/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "citcp/errors.hpp"

namespace citcp {

double BanditArm::window_sum() const {
  double s = 0.0;
  for (double v : window) s += v;
  return s;
}

const BanditArm* BanditState::find(const std::string& id) const {
  const auto it = arms.find(id);
  return it == arms.end() ? nullptr : &it->second;
}

RankedSequence frrmab_select(const BanditState& state,
                             const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw DataError("bandit selection over no candidates");
  const std::size_t k = candidates.size();

  std::vector<double> value(k, 0.0);
  std::vector<bool> unplayed(k, false);
  const double ln_total =
      state.total_plays > 0 ? std::log(static_cast<double>(state.total_plays)) : 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const BanditArm* arm = state.find(candidates[i]);
    if (arm == nullptr || arm->plays == 0) {
      unplayed[i] = true;
      continue;
    }
    value[i] = arm->frr +
               state.cfg.scale_c * std::sqrt(2.0 * ln_total / static_cast<double>(arm->plays));
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool ua = unplayed[a], ub = unplayed[b];
    if (ua != ub) return ua;
    if (ua) return false;  // both unplayed: keep candidate order
    return value[a] > value[b];
  });

  RankedSequence seq;
  seq.order = std::move(order);
  seq.scores.resize(k);
  for (std::size_t p = 0; p < k; ++p)
    seq.scores[seq.order[p]] = static_cast<double>(k - p);
  return seq;
}

void frrmab_update(BanditState& state, const std::vector<std::string>& candidates,
                   const std::vector<double>& rewards) {
  if (candidates.size() != rewards.size())
    throw std::invalid_argument("bandit update: candidate/reward size mismatch");
  if (state.cfg.window < 1) throw ConfigError("bandit window must be >= 1");
  if (!(state.cfg.decay_d > 0.0 && state.cfg.decay_d <= 1.0))
    throw ConfigError("bandit decay must be in (0, 1]");

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto [it, inserted] = state.arms.try_emplace(candidates[i]);
    if (inserted) state.arm_order.push_back(candidates[i]);
    BanditArm& arm = it->second;
    arm.window.push_back(rewards[i]);
    while (arm.window.size() > static_cast<std::size_t>(state.cfg.window))
      arm.window.pop_front();
    arm.plays += 1;
    state.total_plays += 1;
  }

  // Rank arms by window sum (first-seen order breaks ties), assign decayed
  // credit, normalize into FRR. Rewards can be negative (ranking penalties);
  // negative sums carry zero credit so FRR mass stays nonnegative.
  std::vector<std::size_t> rank_order(state.arm_order.size());
  std::iota(rank_order.begin(), rank_order.end(), std::size_t{0});
  std::vector<double> sums(state.arm_order.size());
  for (std::size_t i = 0; i < state.arm_order.size(); ++i)
    sums[i] = state.arms.at(state.arm_order[i]).window_sum();
  std::stable_sort(rank_order.begin(), rank_order.end(),
                   [&](std::size_t a, std::size_t b) { return sums[a] > sums[b]; });

  std::vector<double> credit(state.arm_order.size(), 0.0);
  double normalizer = 0.0;
  for (std::size_t r = 0; r < rank_order.size(); ++r) {
    const double c = std::pow(state.cfg.decay_d, static_cast<double>(r)) *
                     std::max(sums[rank_order[r]], 0.0);
    credit[rank_order[r]] = c;
    normalizer += c;
  }
  for (std::size_t i = 0; i < state.arm_order.size(); ++i) {
    BanditArm& arm = state.arms.at(state.arm_order[i]);
    arm.frr = normalizer > 0.0 ? credit[i] / normalizer : 0.0;
    arm.expected_gain =
        arm.window.empty() ? 0.0 : arm.window_sum() / static_cast<double>(arm.window.size());
  }
}

}  // namespace citcp
