#include "citcp/rl_agents.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "citcp/errors.hpp"

namespace citcp {

namespace {

using nlohmann::json;

std::vector<double> softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

const PolicyConfig& validated(const PolicyConfig& cfg) {
  if (cfg.feature_width < 1) throw ConfigError("policy agent needs a positive feature width");
  if (cfg.score_bins < 1) throw ConfigError("policy agent needs at least one score bin");
  if (cfg.learning_rate <= 0.0) throw ConfigError("policy learning rate must be positive");
  if (cfg.entropy_coef < 0.0) throw ConfigError("policy entropy coefficient must be >= 0");
  if (!(cfg.baseline_step > 0.0 && cfg.baseline_step <= 1.0))
    throw ConfigError("policy baseline step must be in (0, 1]");
  if (cfg.episodes_per_cycle < 0) throw ConfigError("episode budget must be >= 0");
  return cfg;
}

const RetecsConfig& validated(const RetecsConfig& cfg) {
  if (cfg.feature_width < 1) throw ConfigError("retecs agent needs a positive feature width");
  if (cfg.hidden_units < 1) throw ConfigError("retecs hidden units must be >= 1");
  if (cfg.experience_window < 1) throw ConfigError("retecs experience window must be >= 1");
  if (cfg.epochs_per_cycle < 1) throw ConfigError("retecs epochs per cycle must be >= 1");
  if (cfg.learning_rate <= 0.0) throw ConfigError("retecs learning rate must be positive");
  return cfg;
}

std::vector<int> policy_net_sizes(const PolicyConfig& cfg) {
  std::vector<int> sizes;
  switch (cfg.formulation) {
    case Formulation::pointwise: sizes.push_back(cfg.feature_width); break;
    case Formulation::pairwise: sizes.push_back(2 * cfg.feature_width); break;
    case Formulation::listwise: sizes.push_back(cfg.feature_width); break;
  }
  for (int h : cfg.hidden) sizes.push_back(h);
  switch (cfg.formulation) {
    case Formulation::pointwise: sizes.push_back(cfg.score_bins); break;
    case Formulation::pairwise: sizes.push_back(2); break;
    case Formulation::listwise: sizes.push_back(1); break;
  }
  return sizes;
}

}  // namespace

PolicyGradientAgent::PolicyGradientAgent(const PolicyConfig& cfg)
    : cfg_(validated(cfg)),
      net_(policy_net_sizes(cfg_), Rng::mix(cfg.seed, 0x504f4c49ULL)),
      rng_(Rng::mix(cfg.seed, 0x41435449ULL)) {}

std::vector<double> PolicyGradientAgent::action_probabilities(
    const std::vector<std::vector<double>>& candidate_states) const {
  std::vector<double> logits;
  if (cfg_.formulation == Formulation::listwise) {
    logits.reserve(candidate_states.size());
    for (const auto& s : candidate_states) logits.push_back(net_.forward(s)[0]);
  } else {
    logits = net_.forward(candidate_states.front());
  }
  return softmax(logits);
}

int PolicyGradientAgent::act(Formulation formulation,
                             const std::vector<std::vector<double>>& candidate_states,
                             bool explore) {
  if (formulation != cfg_.formulation)
    throw std::invalid_argument("agent formulation does not match the environment");
  const std::vector<double> p = action_probabilities(candidate_states);
  if (!explore) return argmax(p);
  double u = rng_.uniform();
  for (std::size_t i = 0; i < p.size(); ++i) {
    u -= p[i];
    if (u <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

void PolicyGradientAgent::accumulate_policy_gradient(const Trajectory::Step& step,
                                                     double scale_logp, double scale_entropy,
                                                     std::vector<double>& grad) const {
  if (grad.size() != net_.params().size()) grad.assign(net_.params().size(), 0.0);

  if (cfg_.formulation == Formulation::listwise) {
    std::vector<double> logits(step.candidate_states.size());
    std::vector<Mlp::Workspace> ws(step.candidate_states.size());
    for (std::size_t c = 0; c < step.candidate_states.size(); ++c)
      logits[c] = net_.forward(step.candidate_states[c], ws[c])[0];
    const std::vector<double> p = softmax(logits);
    double entropy = 0.0;
    for (double v : p)
      if (v > 0.0) entropy -= v * std::log(v);
    for (std::size_t c = 0; c < step.candidate_states.size(); ++c) {
      const double indicator = static_cast<int>(c) == step.action ? 1.0 : 0.0;
      double d = scale_logp * (indicator - p[c]);
      if (p[c] > 0.0) d += scale_entropy * (-p[c] * (std::log(p[c]) + entropy));
      const double dout[1] = {d};
      net_.backward(ws[c], dout, grad);
    }
    return;
  }

  Mlp::Workspace ws;
  const std::vector<double>& logits = net_.forward(step.candidate_states.front(), ws);
  const std::vector<double> p = softmax(logits);
  double entropy = 0.0;
  for (double v : p)
    if (v > 0.0) entropy -= v * std::log(v);
  std::vector<double> dlogits(p.size(), 0.0);
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double indicator = static_cast<int>(a) == step.action ? 1.0 : 0.0;
    dlogits[a] = scale_logp * (indicator - p[a]);
    if (p[a] > 0.0) dlogits[a] += scale_entropy * (-p[a] * (std::log(p[a]) + entropy));
  }
  net_.backward(ws, dlogits, grad);
}

void PolicyGradientAgent::update(const Trajectory& traj) {
  const double advantage = traj.episode_return - baseline_;
  std::vector<double> grad(net_.params().size(), 0.0);
  for (const auto& step : traj.steps)
    accumulate_policy_gradient(step, advantage, cfg_.entropy_coef, grad);
  for (double g : grad)
    if (!std::isfinite(g)) throw DataError("policy training diverged (non-finite gradient)");
  net_.apply_delta(grad, cfg_.learning_rate);  // gradient ascent
  baseline_ += cfg_.baseline_step * (traj.episode_return - baseline_);
  episodes_seen_ += 1;
}

void PolicyGradientAgent::restore(Mlp net, double baseline, std::uint64_t episodes_seen) {
  if (net.layer_sizes() != net_.layer_sizes())
    throw DataError("agent checkpoint network shape does not match its config");
  net_ = std::move(net);
  baseline_ = baseline;
  episodes_seen_ = episodes_seen;
}

void policy_update(PolicyGradientAgent& agent, const std::vector<Trajectory>& trajectories) {
  for (const auto& traj : trajectories) agent.update(traj);
}

// --- online agents ----------------------------------------------------------

OnlineStepResult online_cycle_update(OnlineAgent& agent, const Cycle& cycle,
                                     const std::vector<std::vector<double>>& features) {
  if (cycle.size() != features.size())
    throw std::invalid_argument("cycle and feature row counts differ");
  std::vector<std::string> ids;
  ids.reserve(cycle.size());
  for (const auto& r : cycle.records) ids.push_back(r.test_id);

  OnlineStepResult out;
  const double t0 = now_seconds();
  out.sequence = agent.prioritize(ids, features);
  const double t1 = now_seconds();
  out.prediction_s = t1 - t0;
  if (!agent.frozen()) {
    agent.learn(cycle, out.sequence, features);
    out.training_s = now_seconds() - t1;
  }
  return out;
}

PolicyOnlineAgent::PolicyOnlineAgent(const PolicyConfig& cfg) : agent_(cfg) {}

std::string PolicyOnlineAgent::kind() const {
  return "policy-" + to_string(agent_.config().formulation);
}

RankedSequence PolicyOnlineAgent::prioritize(const std::vector<std::string>&,
                                             const std::vector<std::vector<double>>& features) {
  RankingEnv env{agent_.config().formulation, agent_.config().score_bins};
  return run_episode(env, agent_, features, /*explore=*/false).sequence;
}

void PolicyOnlineAgent::learn(const Cycle& cycle, const RankedSequence&,
                              const std::vector<std::vector<double>>& features) {
  RankingEnv env{agent_.config().formulation, agent_.config().score_bins};
  const RewardSpec spec{agent_.config().reward};
  for (int e = 0; e < agent_.config().episodes_per_cycle; ++e) {
    EpisodeResult ep = run_episode(env, agent_, features, /*explore=*/true);
    const std::vector<double> rewards = compute_reward(spec, ep.sequence, cycle);
    ep.trajectory.episode_return =
        std::accumulate(rewards.begin(), rewards.end(), 0.0) /
        static_cast<double>(rewards.size());
    agent_.update(ep.trajectory);
  }
}

RetecsAgent::RetecsAgent(const RetecsConfig& cfg)
    : cfg_(validated(cfg)),
      net_({cfg_.feature_width, cfg_.hidden_units, 1}, Rng::mix(cfg.seed, 0x52455445ULL)) {}

RankedSequence RetecsAgent::prioritize(const std::vector<std::string>&,
                                       const std::vector<std::vector<double>>& features) {
  std::vector<double> scores(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) scores[i] = net_.forward(features[i])[0];
  return RankedSequence::from_scores(std::move(scores));
}

void RetecsAgent::learn(const Cycle& cycle, const RankedSequence& predicted,
                        const std::vector<std::vector<double>>& features) {
  const std::vector<double> rewards = compute_reward(RewardSpec{cfg_.reward}, predicted, cycle);
  for (std::size_t i = 0; i < features.size(); ++i) {
    experience_.emplace_back(features[i], rewards[i]);
    while (experience_.size() > static_cast<std::size_t>(cfg_.experience_window))
      experience_.pop_front();
  }

  std::vector<std::size_t> order(experience_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Mlp::Workspace ws;
  std::vector<double> grad(net_.params().size(), 0.0);
  for (int epoch = 0; epoch < cfg_.epochs_per_cycle; ++epoch) {
    Rng shuffle_rng(Rng::mix(cfg_.seed, 0x52455045ULL + cycles_seen_ * 131ULL +
                                            static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    for (std::size_t i : order) {
      const auto& [x, target] = experience_[i];
      const double s = net_.forward(x, ws)[0];
      const double dloss[1] = {2.0 * (s - target)};
      std::fill(grad.begin(), grad.end(), 0.0);
      net_.backward(ws, dloss, grad);
      net_.apply_delta(grad, -cfg_.learning_rate);
    }
  }
  cycles_seen_ += 1;
}

ColemanAgent::ColemanAgent(const ColemanConfig& cfg) : cfg_(cfg) {
  state_.cfg = cfg.bandit;
}

RankedSequence ColemanAgent::prioritize(const std::vector<std::string>& test_ids,
                                        const std::vector<std::vector<double>>&) {
  return frrmab_select(state_, test_ids);
}

void ColemanAgent::learn(const Cycle& cycle, const RankedSequence& predicted,
                         const std::vector<std::vector<double>>&) {
  const std::vector<double> rewards = compute_reward(RewardSpec{cfg_.reward}, predicted, cycle);
  std::vector<std::string> ids;
  ids.reserve(cycle.size());
  for (const auto& r : cycle.records) ids.push_back(r.test_id);
  frrmab_update(state_, ids, rewards);
}

// --- checkpoints -------------------------------------------------------------

namespace {

json net_to_json(const Mlp& net) {
  return json{{"layer_sizes", net.layer_sizes()}, {"params", net.params()}};
}

Mlp net_from_json(const json& j) {
  Mlp net(j.at("layer_sizes").get<std::vector<int>>(), 0);
  net.params() = j.at("params").get<std::vector<double>>();
  return net;
}

}  // namespace

void PolicyOnlineAgent::save(std::ostream& out) const {
  const PolicyConfig& c = agent_.config();
  json j{{"kind", kind()},
         {"frozen", frozen()},
         {"config",
          {{"formulation", to_string(c.formulation)},
           {"feature_width", c.feature_width},
           {"hidden", c.hidden},
           {"score_bins", c.score_bins},
           {"learning_rate", c.learning_rate},
           {"entropy_coef", c.entropy_coef},
           {"baseline_step", c.baseline_step},
           {"episodes_per_cycle", c.episodes_per_cycle},
           {"reward", to_string(c.reward)},
           {"seed", c.seed}}},
         {"baseline", agent_.baseline()},
         {"episodes_seen", agent_.episodes_seen()},
         {"net", net_to_json(agent_.net())}};
  out << j.dump(2) << '\n';
}

void RetecsAgent::save(std::ostream& out) const {
  json exp = json::array();
  for (const auto& [x, r] : experience_) exp.push_back(json{{"x", x}, {"r", r}});
  json j{{"kind", kind()},
         {"frozen", frozen()},
         {"config",
          {{"feature_width", cfg_.feature_width},
           {"hidden_units", cfg_.hidden_units},
           {"experience_window", cfg_.experience_window},
           {"epochs_per_cycle", cfg_.epochs_per_cycle},
           {"learning_rate", cfg_.learning_rate},
           {"reward", to_string(cfg_.reward)},
           {"seed", cfg_.seed}}},
         {"cycles_seen", cycles_seen_},
         {"experience", std::move(exp)},
         {"net", net_to_json(net_)}};
  out << j.dump(2) << '\n';
}

void ColemanAgent::save(std::ostream& out) const {
  json arms = json::array();
  for (const auto& id : state_.arm_order) {
    const BanditArm& arm = state_.arms.at(id);
    arms.push_back(json{{"id", id},
                        {"plays", arm.plays},
                        {"window", std::vector<double>(arm.window.begin(), arm.window.end())},
                        {"frr", arm.frr},
                        {"expected_gain", arm.expected_gain}});
  }
  json j{{"kind", kind()},
         {"frozen", frozen()},
         {"config",
          {{"window", cfg_.bandit.window},
           {"scale_c", cfg_.bandit.scale_c},
           {"decay_d", cfg_.bandit.decay_d},
           {"reward", to_string(cfg_.reward)}}},
         {"total_plays", state_.total_plays},
         {"arms", std::move(arms)}};
  out << j.dump(2) << '\n';
}

std::unique_ptr<OnlineAgent> load_agent(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("agent checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind.rfind("policy-", 0) == 0) {
      const json& c = j.at("config");
      PolicyConfig cfg;
      cfg.formulation = formulation_from_string(c.at("formulation").get<std::string>());
      cfg.feature_width = c.at("feature_width").get<int>();
      cfg.hidden = c.at("hidden").get<std::vector<int>>();
      cfg.score_bins = c.at("score_bins").get<int>();
      cfg.learning_rate = c.at("learning_rate").get<double>();
      cfg.entropy_coef = c.at("entropy_coef").get<double>();
      cfg.baseline_step = c.at("baseline_step").get<double>();
      cfg.episodes_per_cycle = c.at("episodes_per_cycle").get<int>();
      cfg.reward = reward_kind_from_string(c.at("reward").get<std::string>());
      cfg.seed = c.at("seed").get<std::uint64_t>();
      auto agent = std::make_unique<PolicyOnlineAgent>(cfg);
      agent->agent().restore(net_from_json(j.at("net")), j.at("baseline").get<double>(),
                             j.at("episodes_seen").get<std::uint64_t>());
      agent->set_frozen(j.at("frozen").get<bool>());
      return agent;
    }
    if (kind == "retecs") {
      const json& c = j.at("config");
      RetecsConfig cfg;
      cfg.feature_width = c.at("feature_width").get<int>();
      cfg.hidden_units = c.at("hidden_units").get<int>();
      cfg.experience_window = c.at("experience_window").get<int>();
      cfg.epochs_per_cycle = c.at("epochs_per_cycle").get<int>();
      cfg.learning_rate = c.at("learning_rate").get<double>();
      cfg.reward = reward_kind_from_string(c.at("reward").get<std::string>());
      cfg.seed = c.at("seed").get<std::uint64_t>();
      auto agent = std::make_unique<RetecsAgent>(cfg);
      agent->net_ = net_from_json(j.at("net"));
      agent->cycles_seen_ = j.at("cycles_seen").get<std::uint64_t>();
      for (const auto& e : j.at("experience"))
        agent->experience_.emplace_back(e.at("x").get<std::vector<double>>(),
                                        e.at("r").get<double>());
      agent->set_frozen(j.at("frozen").get<bool>());
      return agent;
    }
    if (kind == "coleman") {
      const json& c = j.at("config");
      ColemanConfig cfg;
      cfg.bandit.window = c.at("window").get<int>();
      cfg.bandit.scale_c = c.at("scale_c").get<double>();
      cfg.bandit.decay_d = c.at("decay_d").get<double>();
      cfg.reward = reward_kind_from_string(c.at("reward").get<std::string>());
      auto agent = std::make_unique<ColemanAgent>(cfg);
      agent->state_.total_plays = j.at("total_plays").get<std::int64_t>();
      for (const auto& a : j.at("arms")) {
        const std::string id = a.at("id").get<std::string>();
        BanditArm arm;
        arm.plays = a.at("plays").get<std::int64_t>();
        for (double v : a.at("window").get<std::vector<double>>()) arm.window.push_back(v);
        arm.frr = a.at("frr").get<double>();
        arm.expected_gain = a.at("expected_gain").get<double>();
        agent->state_.arm_order.push_back(id);
        agent->state_.arms.emplace(id, std::move(arm));
      }
      agent->set_frozen(j.at("frozen").get<bool>());
      return agent;
    }
    throw DataError("unknown agent kind '" + kind + "' in checkpoint");
  } catch (const json::exception& e) {
    throw DataError(std::string("agent checkpoint is missing fields: ") + e.what());
  }
}

void save_agent_file(const OnlineAgent& agent, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  agent.save(out);
  if (!out) throw DataError(path + ": write failed");
}

std::unique_ptr<OnlineAgent> load_agent_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return load_agent(in);
}

}  // namespace citcp
