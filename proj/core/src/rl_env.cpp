#include "citcp/rl_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "citcp/errors.hpp"

namespace citcp {

Formulation formulation_from_string(const std::string& s) {
  if (s == "pointwise") return Formulation::pointwise;
  if (s == "pairwise") return Formulation::pairwise;
  if (s == "listwise") return Formulation::listwise;
  throw ConfigError("unknown formulation '" + s +
                    "' (expected pointwise, pairwise, or listwise)");
}

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::pointwise: return "pointwise";
    case Formulation::pairwise: return "pairwise";
    case Formulation::listwise: return "listwise";
  }
  return "pointwise";
}

RewardKind reward_kind_from_string(const std::string& s) {
  if (s == "verdict") return RewardKind::verdict;
  if (s == "rank-distance" || s == "rank_distance") return RewardKind::rank_distance;
  if (s == "timerank") return RewardKind::timerank;
  throw ConfigError("unknown reward kind '" + s +
                    "' (expected verdict, rank-distance, or timerank)");
}

std::string to_string(RewardKind k) {
  switch (k) {
    case RewardKind::verdict: return "verdict";
    case RewardKind::rank_distance: return "rank-distance";
    case RewardKind::timerank: return "timerank";
  }
  return "verdict";
}

std::vector<double> compute_reward(const RewardSpec& spec, const RankedSequence& seq,
                                   const Cycle& cycle) {
  const std::size_t k = cycle.size();
  if (seq.order.size() != k)
    throw std::invalid_argument("reward: sequence and cycle sizes differ");
  std::vector<double> reward(k, 0.0);
  switch (spec.kind) {
    case RewardKind::verdict: {
      for (std::size_t i = 0; i < k; ++i)
        reward[i] = static_cast<double>(verdict_value(cycle.records[i].verdict));
      break;
    }
    case RewardKind::rank_distance: {
      const std::vector<std::size_t> r = seq.ranks();
      const std::vector<std::size_t> ro = optimal_sequence(cycle).ranks();
      for (std::size_t i = 0; i < k; ++i) {
        if (cycle.records[i].verdict != Verdict::fail) continue;
        if (k == 1) {
          reward[i] = 1.0;
          continue;
        }
        const double dist = std::abs(static_cast<double>(r[i]) - static_cast<double>(ro[i]));
        reward[i] = 1.0 - dist / static_cast<double>(k - 1);
      }
      break;
    }
    case RewardKind::timerank: {
      const int m = cycle.fail_count();
      if (m == 0) break;
      // Last scheduled failing position and, per position, how many failing
      // tests run strictly later.
      std::size_t last_fail_pos = 0;
      for (std::size_t p = 0; p < k; ++p)
        if (cycle.records[seq.order[p]].verdict == Verdict::fail) last_fail_pos = p + 1;
      std::size_t fails_seen = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const std::size_t rec = seq.order[p];
        if (cycle.records[rec].verdict == Verdict::fail) {
          reward[rec] = static_cast<double>(k - p) / static_cast<double>(k);
          ++fails_seen;
        } else if (p + 1 < last_fail_pos) {
          reward[rec] = -static_cast<double>(m - fails_seen) / static_cast<double>(m);
        }
      }
      break;
    }
  }
  return reward;
}

std::size_t episode_step_floor(std::size_t n) {
  if (n < 2) return 0;
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * std::log2(static_cast<double>(n))));
}

namespace {

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

EpisodeResult run_episode(const RankingEnv& env, PolicyActor& actor,
                          const std::vector<std::vector<double>>& features, bool explore) {
  const std::size_t n = features.size();
  if (n == 0) throw DataError("episode on an empty cycle");

  EpisodeResult result;
  Trajectory& traj = result.trajectory;
  traj.formulation = env.formulation;

  switch (env.formulation) {
    case Formulation::pointwise: {
      if (env.score_bins < 1) throw ConfigError("pointwise needs at least one score bin");
      std::vector<double> scores(n);
      for (std::size_t i = 0; i < n; ++i) {
        Trajectory::Step step;
        step.candidate_states = {features[i]};
        step.action = actor.act(env.formulation, step.candidate_states, explore);
        scores[i] = (static_cast<double>(step.action) + 0.5) /
                    static_cast<double>(env.score_bins);
        traj.steps.push_back(std::move(step));
      }
      result.sequence = RankedSequence::from_scores(std::move(scores));
      break;
    }
    case Formulation::pairwise: {
      // Bottom-up merge sort; every comparison is one agent decision.
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::vector<std::size_t> buf(n);
      for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo < n; lo += 2 * width) {
          const std::size_t mid = std::min(lo + width, n);
          const std::size_t hi = std::min(lo + 2 * width, n);
          if (mid >= hi) continue;
          std::size_t a = lo, b = mid, out = lo;
          while (a < mid && b < hi) {
            Trajectory::Step step;
            step.candidate_states = {concat(features[order[a]], features[order[b]])};
            step.action = actor.act(env.formulation, step.candidate_states, explore);
            buf[out++] = step.action == 0 ? order[a++] : order[b++];
            traj.steps.push_back(std::move(step));
          }
          while (a < mid) buf[out++] = order[a++];
          while (b < hi) buf[out++] = order[b++];
          std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                    buf.begin() + static_cast<std::ptrdiff_t>(hi),
                    order.begin() + static_cast<std::ptrdiff_t>(lo));
        }
      }
      result.sequence.order = std::move(order);
      result.sequence.scores.resize(n);
      for (std::size_t p = 0; p < n; ++p)
        result.sequence.scores[result.sequence.order[p]] = static_cast<double>(n - p);
      break;
    }
    case Formulation::listwise: {
      std::vector<std::size_t> remaining(n);
      for (std::size_t i = 0; i < n; ++i) remaining[i] = i;
      result.sequence.order.reserve(n);
      while (!remaining.empty()) {
        Trajectory::Step step;
        step.candidate_states.reserve(remaining.size());
        for (std::size_t idx : remaining) step.candidate_states.push_back(features[idx]);
        step.action = actor.act(env.formulation, step.candidate_states, explore);
        if (step.action < 0 || static_cast<std::size_t>(step.action) >= remaining.size())
          throw std::logic_error("listwise action out of range");
        result.sequence.order.push_back(remaining[static_cast<std::size_t>(step.action)]);
        remaining.erase(remaining.begin() + step.action);
        traj.steps.push_back(std::move(step));
      }
      result.sequence.scores.resize(n);
      for (std::size_t p = 0; p < n; ++p)
        result.sequence.scores[result.sequence.order[p]] = static_cast<double>(n - p);
      break;
    }
  }

  traj.natural_steps = traj.steps.size();
  if (traj.natural_steps > 0) {
    const std::size_t floor = episode_step_floor(n);
    for (std::size_t i = 0; traj.steps.size() < floor; ++i)
      traj.steps.push_back(traj.steps[i % traj.natural_steps]);
  }
  return result;
}

}  // namespace citcp
