#include "citcp/experiment_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

#include "citcp/csv.hpp"
#include "citcp/errors.hpp"

namespace citcp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(',', start);
    const std::string item =
        trim(pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Typed lookups that remember which keys were consumed, so leftovers can be
// rejected by name.
class ConfigReader {
 public:
  explicit ConfigReader(const TextConfig& cfg) : cfg_(cfg) {}

  const std::string* find(const std::string& key) {
    used_.insert(key);
    return cfg_.find(key);
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    const std::string* v = find(key);
    return v ? *v : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + *v + "'");
  }

  long long get_int(const std::string& key, long long fallback, long long min_value) {
    const std::string* v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    const long long parsed = std::strtoll(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size())
      throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
    if (parsed < min_value)
      throw ConfigError("config key '" + key + "': value " + *v + " is below " +
                        std::to_string(min_value));
    return parsed;
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size())
      throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + *v +
                        "'");
    return parsed;
  }

  double get_double(const std::string& key, double fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    const double parsed = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size())
      throw ConfigError("config key '" + key + "': expected a number, got '" + *v + "'");
    return parsed;
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::vector<int> out;
    for (const std::string& item : split_list(*v)) {
      char* end = nullptr;
      const long long parsed = std::strtoll(item.c_str(), &end, 10);
      if (end != item.c_str() + item.size() || parsed < 1)
        throw ConfigError("config key '" + key + "': expected positive integers, got '" + *v +
                          "'");
      out.push_back(static_cast<int>(parsed));
    }
    if (out.empty())
      throw ConfigError("config key '" + key + "': expected at least one integer");
    return out;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : cfg_.entries)
      if (!used_.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

 private:
  const TextConfig& cfg_;
  std::set<std::string> used_;
};

RewardKind get_reward(ConfigReader& r, const std::string& key, RewardKind fallback) {
  const std::string* v = r.find(key);
  return v ? reward_kind_from_string(*v) : fallback;
}

}  // namespace

ExperimentConfig experiment_from_config(const TextConfig& text) {
  ConfigReader r(text);
  ExperimentConfig cfg;

  cfg.seed = r.get_seed("seed", cfg.seed);
  cfg.train_record_target = static_cast<std::size_t>(
      r.get_int("train_record_target", static_cast<long long>(cfg.train_record_target), 1));
  cfg.refit_every = static_cast<int>(r.get_int("refit_every", cfg.refit_every, 0));
  cfg.jobs = static_cast<int>(r.get_int("jobs", cfg.jobs, 1));
  cfg.out_dir = r.get_string("out_dir", cfg.out_dir);

  cfg.protocols.baseline = r.get_bool("protocols.baseline", cfg.protocols.baseline);
  cfg.protocols.smote = r.get_bool("protocols.smote", cfg.protocols.smote);
  cfg.protocols.pretrain = r.get_bool("protocols.pretrain", cfg.protocols.pretrain);
  cfg.protocols.early_stop = r.get_bool("protocols.early_stop", cfg.protocols.early_stop);
  cfg.protocols.pretrain_source =
      r.get_string("protocols.pretrain_source", cfg.protocols.pretrain_source);

  cfg.smote.k_neighbors =
      static_cast<int>(r.get_int("smote.k_neighbors", cfg.smote.k_neighbors, 1));
  cfg.smote.target_ratio = r.get_double("smote.target_ratio", cfg.smote.target_ratio);
  cfg.smote.seed = r.get_seed("smote.seed", cfg.smote.seed);

  // SL hyperparameters.
  cfg.sl.mart.stages = static_cast<int>(r.get_int("mart.stages", cfg.sl.mart.stages, 1));
  cfg.sl.mart.max_leaves =
      static_cast<int>(r.get_int("mart.max_leaves", cfg.sl.mart.max_leaves, 2));
  cfg.sl.mart.min_leaf = static_cast<int>(r.get_int("mart.min_leaf", cfg.sl.mart.min_leaf, 1));
  cfg.sl.mart.shrinkage = r.get_double("mart.shrinkage", cfg.sl.mart.shrinkage);

  cfg.sl.lambdamart.boost.stages =
      static_cast<int>(r.get_int("lambdamart.stages", cfg.sl.lambdamart.boost.stages, 1));
  cfg.sl.lambdamart.boost.max_leaves = static_cast<int>(
      r.get_int("lambdamart.max_leaves", cfg.sl.lambdamart.boost.max_leaves, 2));
  cfg.sl.lambdamart.boost.min_leaf =
      static_cast<int>(r.get_int("lambdamart.min_leaf", cfg.sl.lambdamart.boost.min_leaf, 1));
  cfg.sl.lambdamart.boost.shrinkage =
      r.get_double("lambdamart.shrinkage", cfg.sl.lambdamart.boost.shrinkage);
  cfg.sl.lambdamart.sigma = r.get_double("lambdamart.sigma", cfg.sl.lambdamart.sigma);

  cfg.sl.rankboost.rounds =
      static_cast<int>(r.get_int("rankboost.rounds", cfg.sl.rankboost.rounds, 1));
  cfg.sl.rankboost.thresholds_per_feature = static_cast<int>(
      r.get_int("rankboost.thresholds_per_feature", cfg.sl.rankboost.thresholds_per_feature, 1));

  cfg.sl.ranknet.hidden = r.get_int_list("ranknet.hidden", cfg.sl.ranknet.hidden);
  cfg.sl.ranknet.epochs =
      static_cast<int>(r.get_int("ranknet.epochs", cfg.sl.ranknet.epochs, 1));
  cfg.sl.ranknet.learning_rate =
      r.get_double("ranknet.learning_rate", cfg.sl.ranknet.learning_rate);
  cfg.sl.ranknet.seed = r.get_seed("ranknet.seed", cfg.sl.ranknet.seed);

  cfg.sl.coordinate_ascent.restarts = static_cast<int>(
      r.get_int("coordinate_ascent.restarts", cfg.sl.coordinate_ascent.restarts, 1));
  cfg.sl.coordinate_ascent.sweeps = static_cast<int>(
      r.get_int("coordinate_ascent.sweeps", cfg.sl.coordinate_ascent.sweeps, 1));
  cfg.sl.coordinate_ascent.grid_span = static_cast<int>(
      r.get_int("coordinate_ascent.grid_span", cfg.sl.coordinate_ascent.grid_span, 1));
  cfg.sl.coordinate_ascent.seed =
      r.get_seed("coordinate_ascent.seed", cfg.sl.coordinate_ascent.seed);

  cfg.sl.deeporder.hidden = r.get_int_list("deeporder.hidden", cfg.sl.deeporder.hidden);
  cfg.sl.deeporder.epochs =
      static_cast<int>(r.get_int("deeporder.epochs", cfg.sl.deeporder.epochs, 1));
  cfg.sl.deeporder.learning_rate =
      r.get_double("deeporder.learning_rate", cfg.sl.deeporder.learning_rate);
  cfg.sl.deeporder.seed = r.get_seed("deeporder.seed", cfg.sl.deeporder.seed);

  // RL templates (feature_width and formulation are resolved per run).
  cfg.policy.hidden = r.get_int_list("policy.hidden", cfg.policy.hidden);
  cfg.policy.score_bins =
      static_cast<int>(r.get_int("policy.score_bins", cfg.policy.score_bins, 2));
  cfg.policy.learning_rate = r.get_double("policy.learning_rate", cfg.policy.learning_rate);
  cfg.policy.entropy_coef = r.get_double("policy.entropy_coef", cfg.policy.entropy_coef);
  cfg.policy.baseline_step = r.get_double("policy.baseline_step", cfg.policy.baseline_step);
  cfg.policy.episodes_per_cycle = static_cast<int>(
      r.get_int("policy.episodes_per_cycle", cfg.policy.episodes_per_cycle, 1));
  cfg.policy.reward = get_reward(r, "policy.reward", cfg.policy.reward);
  cfg.policy.seed = r.get_seed("policy.seed", cfg.policy.seed);

  cfg.retecs.hidden_units =
      static_cast<int>(r.get_int("retecs.hidden_units", cfg.retecs.hidden_units, 1));
  cfg.retecs.experience_window =
      static_cast<int>(r.get_int("retecs.experience_window", cfg.retecs.experience_window, 1));
  cfg.retecs.epochs_per_cycle =
      static_cast<int>(r.get_int("retecs.epochs_per_cycle", cfg.retecs.epochs_per_cycle, 1));
  cfg.retecs.learning_rate = r.get_double("retecs.learning_rate", cfg.retecs.learning_rate);
  cfg.retecs.reward = get_reward(r, "retecs.reward", cfg.retecs.reward);
  cfg.retecs.seed = r.get_seed("retecs.seed", cfg.retecs.seed);

  cfg.coleman.bandit.window =
      static_cast<int>(r.get_int("coleman.window", cfg.coleman.bandit.window, 1));
  cfg.coleman.bandit.scale_c = r.get_double("coleman.scale_c", cfg.coleman.bandit.scale_c);
  cfg.coleman.bandit.decay_d = r.get_double("coleman.decay_d", cfg.coleman.bandit.decay_d);
  cfg.coleman.reward = get_reward(r, "coleman.reward", cfg.coleman.reward);

  // Feature schema shared by all techniques; family defaults to each
  // technique's preset unless set explicitly.
  const std::string* family_token = r.find("features.family");
  const int history_window =
      static_cast<int>(r.get_int("features.history_window", 4, 1));
  const bool include_extras = r.get_bool("features.include_extra_columns", true);
  const std::string* extras_raw = r.find("features.extra_columns");
  const std::vector<std::string> extras =
      extras_raw ? split_list(*extras_raw) : std::vector<std::string>{};

  const std::string* techniques_raw = r.find("techniques");
  if (techniques_raw) {
    std::set<std::string> seen;
    for (const std::string& token : split_list(*techniques_raw)) {
      if (!seen.insert(token).second)
        throw ConfigError("technique '" + token + "' listed twice");
      TechniqueSpec spec = TechniqueSpec::for_kind(technique_from_string(token));
      if (family_token) spec.schema.family = feature_family_from_string(*family_token);
      spec.schema.history_window = history_window;
      spec.schema.include_extra_columns = include_extras;
      spec.schema.extra_columns = extras;
      cfg.techniques.push_back(spec);
    }
  }

  for (const std::string& name : text.child_sections("subject")) {
    const std::string prefix = "subject." + name;
    SubjectSpec spec;
    spec.name = name;
    const std::string source = r.get_string(prefix + ".source", "csv");
    if (source == "csv") {
      spec.source = SubjectSpec::Source::csv;
      const std::string* path = r.find(prefix + ".path");
      if (!path || path->empty())
        throw ConfigError("config key '" + prefix + ".path': required for a csv subject");
      spec.path = *path;
    } else if (source == "synth") {
      spec.source = SubjectSpec::Source::synth;
      SynthConfig& sy = spec.synth;
      sy.name = name;
      sy.cycles = static_cast<int>(r.get_int(prefix + ".cycles", sy.cycles, 1));
      sy.tests_per_cycle =
          static_cast<int>(r.get_int(prefix + ".tests_per_cycle", sy.tests_per_cycle, 1));
      sy.test_pool = static_cast<int>(r.get_int(prefix + ".test_pool", sy.test_pool, 0));
      sy.failure_rate_target =
          r.get_double(prefix + ".failure_rate_target", sy.failure_rate_target);
      sy.signal_strength = r.get_double(prefix + ".signal_strength", sy.signal_strength);
      sy.duration_lo_s = r.get_double(prefix + ".duration_lo_s", sy.duration_lo_s);
      sy.duration_hi_s = r.get_double(prefix + ".duration_hi_s", sy.duration_hi_s);
      sy.commit_interval_mean_s =
          r.get_double(prefix + ".commit_interval_mean_s", sy.commit_interval_mean_s);
      sy.seed = r.get_seed(prefix + ".seed", sy.seed);
    } else {
      throw ConfigError("config key '" + prefix + ".source': expected csv or synth, got '" +
                        source + "'");
    }
    cfg.subjects.push_back(std::move(spec));
  }

  r.reject_unknown();
  return cfg;
}

SynthConfig synth_from_config(const TextConfig& text) {
  ConfigReader r(text);
  SynthConfig sy;
  sy.name = r.get_string("name", sy.name);
  sy.cycles = static_cast<int>(r.get_int("cycles", sy.cycles, 1));
  sy.tests_per_cycle = static_cast<int>(r.get_int("tests_per_cycle", sy.tests_per_cycle, 1));
  sy.test_pool = static_cast<int>(r.get_int("test_pool", sy.test_pool, 0));
  sy.failure_rate_target = r.get_double("failure_rate_target", sy.failure_rate_target);
  sy.signal_strength = r.get_double("signal_strength", sy.signal_strength);
  sy.duration_lo_s = r.get_double("duration_lo_s", sy.duration_lo_s);
  sy.duration_hi_s = r.get_double("duration_hi_s", sy.duration_hi_s);
  sy.commit_interval_mean_s =
      r.get_double("commit_interval_mean_s", sy.commit_interval_mean_s);
  sy.seed = r.get_seed("seed", sy.seed);
  r.reject_unknown();
  return sy;
}

TextConfig resolved_config(const ExperimentConfig& cfg) {
  TextConfig out;
  const auto set_int = [&](const std::string& k, long long v) {
    out.set(k, std::to_string(v));
  };
  const auto set_dbl = [&](const std::string& k, double v) { out.set(k, format_double(v)); };
  const auto set_bool = [&](const std::string& k, bool v) { out.set(k, v ? "true" : "false"); };
  const auto join_ints = [](const std::vector<int>& xs) {
    std::ostringstream s;
    for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? ", " : "") << xs[i];
    return s.str();
  };

  set_int("seed", static_cast<long long>(cfg.seed));
  set_int("train_record_target", static_cast<long long>(cfg.train_record_target));
  set_int("refit_every", cfg.refit_every);
  set_int("jobs", cfg.jobs);
  out.set("out_dir", cfg.out_dir);

  {
    std::ostringstream s;
    for (std::size_t i = 0; i < cfg.techniques.size(); ++i)
      s << (i ? ", " : "") << to_string(cfg.techniques[i].kind);
    out.set("techniques", s.str());
  }

  set_bool("protocols.baseline", cfg.protocols.baseline);
  set_bool("protocols.smote", cfg.protocols.smote);
  set_bool("protocols.pretrain", cfg.protocols.pretrain);
  set_bool("protocols.early_stop", cfg.protocols.early_stop);
  out.set("protocols.pretrain_source", cfg.protocols.pretrain_source);

  set_int("smote.k_neighbors", cfg.smote.k_neighbors);
  set_dbl("smote.target_ratio", cfg.smote.target_ratio);
  set_int("smote.seed", static_cast<long long>(cfg.smote.seed));

  if (!cfg.techniques.empty()) {
    const FeatureSchema& schema = cfg.techniques.front().schema;
    const bool uniform_family = std::all_of(
        cfg.techniques.begin(), cfg.techniques.end(),
        [&](const TechniqueSpec& t) { return t.schema.family == schema.family; });
    if (uniform_family) out.set("features.family", to_string(schema.family));
    set_int("features.history_window", schema.history_window);
    set_bool("features.include_extra_columns", schema.include_extra_columns);
    {
      std::ostringstream s;
      for (std::size_t i = 0; i < schema.extra_columns.size(); ++i)
        s << (i ? ", " : "") << schema.extra_columns[i];
      out.set("features.extra_columns", s.str());
    }
  }

  set_int("mart.stages", cfg.sl.mart.stages);
  set_int("mart.max_leaves", cfg.sl.mart.max_leaves);
  set_int("mart.min_leaf", cfg.sl.mart.min_leaf);
  set_dbl("mart.shrinkage", cfg.sl.mart.shrinkage);

  set_int("lambdamart.stages", cfg.sl.lambdamart.boost.stages);
  set_int("lambdamart.max_leaves", cfg.sl.lambdamart.boost.max_leaves);
  set_int("lambdamart.min_leaf", cfg.sl.lambdamart.boost.min_leaf);
  set_dbl("lambdamart.shrinkage", cfg.sl.lambdamart.boost.shrinkage);
  set_dbl("lambdamart.sigma", cfg.sl.lambdamart.sigma);

  set_int("rankboost.rounds", cfg.sl.rankboost.rounds);
  set_int("rankboost.thresholds_per_feature", cfg.sl.rankboost.thresholds_per_feature);

  out.set("ranknet.hidden", join_ints(cfg.sl.ranknet.hidden));
  set_int("ranknet.epochs", cfg.sl.ranknet.epochs);
  set_dbl("ranknet.learning_rate", cfg.sl.ranknet.learning_rate);
  set_int("ranknet.seed", static_cast<long long>(cfg.sl.ranknet.seed));

  set_int("coordinate_ascent.restarts", cfg.sl.coordinate_ascent.restarts);
  set_int("coordinate_ascent.sweeps", cfg.sl.coordinate_ascent.sweeps);
  set_int("coordinate_ascent.grid_span", cfg.sl.coordinate_ascent.grid_span);
  set_int("coordinate_ascent.seed", static_cast<long long>(cfg.sl.coordinate_ascent.seed));

  out.set("deeporder.hidden", join_ints(cfg.sl.deeporder.hidden));
  set_int("deeporder.epochs", cfg.sl.deeporder.epochs);
  set_dbl("deeporder.learning_rate", cfg.sl.deeporder.learning_rate);
  set_int("deeporder.seed", static_cast<long long>(cfg.sl.deeporder.seed));

  out.set("policy.hidden", join_ints(cfg.policy.hidden));
  set_int("policy.score_bins", cfg.policy.score_bins);
  set_dbl("policy.learning_rate", cfg.policy.learning_rate);
  set_dbl("policy.entropy_coef", cfg.policy.entropy_coef);
  set_dbl("policy.baseline_step", cfg.policy.baseline_step);
  set_int("policy.episodes_per_cycle", cfg.policy.episodes_per_cycle);
  out.set("policy.reward", to_string(cfg.policy.reward));
  set_int("policy.seed", static_cast<long long>(cfg.policy.seed));

  set_int("retecs.hidden_units", cfg.retecs.hidden_units);
  set_int("retecs.experience_window", cfg.retecs.experience_window);
  set_int("retecs.epochs_per_cycle", cfg.retecs.epochs_per_cycle);
  set_dbl("retecs.learning_rate", cfg.retecs.learning_rate);
  out.set("retecs.reward", to_string(cfg.retecs.reward));
  set_int("retecs.seed", static_cast<long long>(cfg.retecs.seed));

  set_int("coleman.window", cfg.coleman.bandit.window);
  set_dbl("coleman.scale_c", cfg.coleman.bandit.scale_c);
  set_dbl("coleman.decay_d", cfg.coleman.bandit.decay_d);
  out.set("coleman.reward", to_string(cfg.coleman.reward));

  for (const SubjectSpec& s : cfg.subjects) {
    const std::string prefix = "subject." + s.name;
    if (s.source == SubjectSpec::Source::csv) {
      out.set(prefix + ".source", "csv");
      out.set(prefix + ".path", s.path);
    } else {
      out.set(prefix + ".source", "synth");
      set_int(prefix + ".cycles", s.synth.cycles);
      set_int(prefix + ".tests_per_cycle", s.synth.tests_per_cycle);
      set_int(prefix + ".test_pool", s.synth.test_pool);
      set_dbl(prefix + ".failure_rate_target", s.synth.failure_rate_target);
      set_dbl(prefix + ".signal_strength", s.synth.signal_strength);
      set_dbl(prefix + ".duration_lo_s", s.synth.duration_lo_s);
      set_dbl(prefix + ".duration_hi_s", s.synth.duration_hi_s);
      set_dbl(prefix + ".commit_interval_mean_s", s.synth.commit_interval_mean_s);
      set_int(prefix + ".seed", static_cast<long long>(s.synth.seed));
    }
  }

  return out;
}

}  // namespace citcp
