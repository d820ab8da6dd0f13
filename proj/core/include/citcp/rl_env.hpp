#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "citcp/subject.hpp"

namespace citcp {

// How the agent interacts with one cycle: score every test independently,
// drive a comparison sort, or repeatedly pick the next test from the
// remaining ones.
enum class Formulation { pointwise, pairwise, listwise };
Formulation formulation_from_string(const std::string& s);
std::string to_string(Formulation f);

enum class RewardKind { verdict, rank_distance, timerank };
RewardKind reward_kind_from_string(const std::string& s);
std::string to_string(RewardKind k);

struct RewardSpec {
  RewardKind kind = RewardKind::timerank;
};

// Per-record reward in [-1, 1], computed after the cycle ran:
//   verdict        1 for failing tests, 0 otherwise
//   rank_distance  failing: 1 - |rank - optimal rank|/(k-1), else 0; 1 if k=1
//   timerank       failing at position p: (k-p+1)/k; passing scheduled before
//                  the last failing test: -(fraction of failing tests it
//                  precedes); otherwise 0
std::vector<double> compute_reward(const RewardSpec& spec, const RankedSequence& seq,
                                   const Cycle& cycle);

// One episode's decision record, sufficient to recompute action
// probabilities under any parameters.
struct Trajectory {
  struct Step {
    // listwise: one state per remaining candidate; otherwise a single state.
    std::vector<std::vector<double>> candidate_states;
    int action = 0;
  };
  Formulation formulation = Formulation::pointwise;
  std::vector<Step> steps;
  std::size_t natural_steps = 0;  // before padding to the step floor
  double episode_return = 0.0;
};

struct RankingEnv {
  Formulation formulation = Formulation::pointwise;
  int score_bins = 100;  // pointwise action space over [0, 1]
};

// Episode length floor ceil(n * log2(n)); shorter episodes are padded by
// replaying recorded decisions.
std::size_t episode_step_floor(std::size_t n);

// Anything that can pick one action from a decision point's candidate
// logits. `explore` samples from the policy; otherwise argmax.
class PolicyActor {
 public:
  virtual ~PolicyActor() = default;
  virtual int act(Formulation formulation,
                  const std::vector<std::vector<double>>& candidate_states, bool explore) = 0;
};

// Runs one full prioritization episode over a cycle's feature rows. Sees
// features only; verdicts stay hidden until reward time. Throws on an empty
// cycle.
struct EpisodeResult {
  RankedSequence sequence;
  Trajectory trajectory;
};

EpisodeResult run_episode(const RankingEnv& env, PolicyActor& actor,
                          const std::vector<std::vector<double>>& features, bool explore);

}  // namespace citcp
