#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "citcp/bandit.hpp"
#include "citcp/mlp.hpp"
#include "citcp/rl_env.hpp"
#include "citcp/rng.hpp"
#include "citcp/subject.hpp"

namespace citcp {

// --- Policy-gradient agent -------------------------------------------------

struct PolicyConfig {
  Formulation formulation = Formulation::pointwise;
  int feature_width = 0;
  std::vector<int> hidden = {16};
  int score_bins = 100;         // pointwise action space
  double learning_rate = 0.05;
  double entropy_coef = 0.01;
  double baseline_step = 0.05;  // running-mean return tracker
  int episodes_per_cycle = 200;
  RewardKind reward = RewardKind::timerank;
  std::uint64_t seed = 1;
};

// REINFORCE with a running-mean baseline and entropy regularization. One
// shared network serves all three formulations: per-candidate scalar logits
// for listwise, a bin distribution for pointwise, a 2-way choice for
// pairwise. Greedy action selection (explore = false) is deterministic, so a
// frozen agent is a pure function of its inputs.
class PolicyGradientAgent : public PolicyActor {
 public:
  explicit PolicyGradientAgent(const PolicyConfig& cfg);

  const PolicyConfig& config() const { return cfg_; }

  std::vector<double> action_probabilities(
      const std::vector<std::vector<double>>& candidate_states) const;

  int act(Formulation formulation, const std::vector<std::vector<double>>& candidate_states,
          bool explore) override;

  // One episodic update: advantage = episode_return - baseline. Throws
  // DataError if the gradient turns non-finite (training diverged).
  void update(const Trajectory& traj);

  // d(log pi(action | step) * scale)/d(params), accumulated into grad; also
  // adds scale_entropy * dH/d(params). Exposed for gradient verification.
  void accumulate_policy_gradient(const Trajectory::Step& step, double scale_logp,
                                  double scale_entropy, std::vector<double>& grad) const;

  double baseline() const { return baseline_; }
  std::uint64_t episodes_seen() const { return episodes_seen_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // Reinstates checkpointed training state; the net must keep its shape.
  void restore(Mlp net, double baseline, std::uint64_t episodes_seen);

 private:
  PolicyConfig cfg_;
  Mlp net_;
  double baseline_ = 0.0;
  std::uint64_t episodes_seen_ = 0;
  Rng rng_;
};

// Applies one update per trajectory, in order.
void policy_update(PolicyGradientAgent& agent, const std::vector<Trajectory>& trajectories);

// --- Online (cycle-by-cycle) agents -----------------------------------------

// A prioritizer that predicts from features only and learns from revealed
// verdicts afterwards. Frozen agents must not change any learning state.
class OnlineAgent {
 public:
  virtual ~OnlineAgent() = default;

  virtual std::string kind() const = 0;
  virtual RankedSequence prioritize(const std::vector<std::string>& test_ids,
                                    const std::vector<std::vector<double>>& features) = 0;
  virtual void learn(const Cycle& cycle, const RankedSequence& predicted,
                     const std::vector<std::vector<double>>& features) = 0;

  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  virtual void save(std::ostream& out) const = 0;

 protected:
  bool frozen_ = false;
};

std::unique_ptr<OnlineAgent> load_agent(std::istream& in);
void save_agent_file(const OnlineAgent& agent, const std::string& path);
std::unique_ptr<OnlineAgent> load_agent_file(const std::string& path);

// Prediction first, then (unless frozen) learning; both timed separately.
struct OnlineStepResult {
  RankedSequence sequence;
  double prediction_s = 0.0;
  double training_s = 0.0;
};

OnlineStepResult online_cycle_update(OnlineAgent& agent, const Cycle& cycle,
                                     const std::vector<std::vector<double>>& features);

// Policy-gradient agent run online: greedy episode for prediction, then a
// budget of exploratory episodes scored by the configured reward.
class PolicyOnlineAgent : public OnlineAgent {
 public:
  explicit PolicyOnlineAgent(const PolicyConfig& cfg);

  std::string kind() const override;
  RankedSequence prioritize(const std::vector<std::string>& test_ids,
                            const std::vector<std::vector<double>>& features) override;
  void learn(const Cycle& cycle, const RankedSequence& predicted,
             const std::vector<std::vector<double>>& features) override;
  void save(std::ostream& out) const override;

  PolicyGradientAgent& agent() { return agent_; }

 private:
  PolicyGradientAgent agent_;
};

// Shallow-network value learner: scores tests with a small regression net,
// stores (features, reward) experience in a sliding window, refits every
// cycle.
struct RetecsConfig {
  int feature_width = 0;
  int hidden_units = 12;
  int experience_window = 1000;
  int epochs_per_cycle = 10;
  double learning_rate = 0.01;
  RewardKind reward = RewardKind::verdict;
  std::uint64_t seed = 1;
};

class RetecsAgent : public OnlineAgent {
 public:
  explicit RetecsAgent(const RetecsConfig& cfg);

  std::string kind() const override { return "retecs"; }
  RankedSequence prioritize(const std::vector<std::string>& test_ids,
                            const std::vector<std::vector<double>>& features) override;
  void learn(const Cycle& cycle, const RankedSequence& predicted,
             const std::vector<std::vector<double>>& features) override;
  void save(std::ostream& out) const override;

  const RetecsConfig& config() const { return cfg_; }
  std::size_t experience_size() const { return experience_.size(); }
  Mlp& net() { return net_; }

 private:
  friend std::unique_ptr<OnlineAgent> load_agent(std::istream&);
  RetecsConfig cfg_;
  Mlp net_;
  std::deque<std::pair<std::vector<double>, double>> experience_;
  std::uint64_t cycles_seen_ = 0;
};

// FRRMAB bandit over test ids with the time-rank reward.
struct ColemanConfig {
  FrrmabConfig bandit;
  RewardKind reward = RewardKind::timerank;
};

class ColemanAgent : public OnlineAgent {
 public:
  explicit ColemanAgent(const ColemanConfig& cfg);

  std::string kind() const override { return "coleman"; }
  RankedSequence prioritize(const std::vector<std::string>& test_ids,
                            const std::vector<std::vector<double>>& features) override;
  void learn(const Cycle& cycle, const RankedSequence& predicted,
             const std::vector<std::vector<double>>& features) override;
  void save(std::ostream& out) const override;

  const BanditState& state() const { return state_; }

 private:
  friend std::unique_ptr<OnlineAgent> load_agent(std::istream&);
  ColemanConfig cfg_;
  BanditState state_;
};

}  // namespace citcp
