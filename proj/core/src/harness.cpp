#include "citcp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include "citcp/csv.hpp"
#include "citcp/errors.hpp"
#include "citcp/rng.hpp"

namespace citcp {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool verdict_labeled_sl(TechniqueKind k) {
  switch (k) {
    case TechniqueKind::mart:
    case TechniqueKind::lambdamart:
    case TechniqueKind::rankboost:
    case TechniqueKind::ranknet:
    case TechniqueKind::coordinate_ascent:
      return true;
    default:
      return false;
  }
}

}  // namespace

TechniqueKind technique_from_string(const std::string& s) {
  if (s == "oracle") return TechniqueKind::oracle;
  if (s == "random") return TechniqueKind::random_order;
  if (s == "mart") return TechniqueKind::mart;
  if (s == "lambdamart") return TechniqueKind::lambdamart;
  if (s == "rankboost") return TechniqueKind::rankboost;
  if (s == "ranknet") return TechniqueKind::ranknet;
  if (s == "coordinate-ascent" || s == "coordinate_ascent")
    return TechniqueKind::coordinate_ascent;
  if (s == "deeporder") return TechniqueKind::deeporder;
  if (s == "retecs") return TechniqueKind::retecs;
  if (s == "coleman") return TechniqueKind::coleman;
  if (s == "policy-pointwise") return TechniqueKind::policy_pointwise;
  if (s == "policy-pairwise") return TechniqueKind::policy_pairwise;
  if (s == "policy-listwise") return TechniqueKind::policy_listwise;
  throw ConfigError("unknown technique '" + s + "'");
}

std::string to_string(TechniqueKind k) {
  switch (k) {
    case TechniqueKind::oracle: return "oracle";
    case TechniqueKind::random_order: return "random";
    case TechniqueKind::mart: return "mart";
    case TechniqueKind::lambdamart: return "lambdamart";
    case TechniqueKind::rankboost: return "rankboost";
    case TechniqueKind::ranknet: return "ranknet";
    case TechniqueKind::coordinate_ascent: return "coordinate-ascent";
    case TechniqueKind::deeporder: return "deeporder";
    case TechniqueKind::retecs: return "retecs";
    case TechniqueKind::coleman: return "coleman";
    case TechniqueKind::policy_pointwise: return "policy-pointwise";
    case TechniqueKind::policy_pairwise: return "policy-pairwise";
    case TechniqueKind::policy_listwise: return "policy-listwise";
  }
  return "random";
}

bool technique_is_rl(TechniqueKind k) {
  switch (k) {
    case TechniqueKind::retecs:
    case TechniqueKind::coleman:
    case TechniqueKind::policy_pointwise:
    case TechniqueKind::policy_pairwise:
    case TechniqueKind::policy_listwise:
      return true;
    default:
      return false;
  }
}

bool technique_is_sl(TechniqueKind k) {
  return verdict_labeled_sl(k) || k == TechniqueKind::deeporder;
}

bool technique_warm_startable(TechniqueKind k) {
  return technique_is_sl(k) || technique_is_rl(k);
}

TechniqueSpec TechniqueSpec::for_kind(TechniqueKind k) {
  TechniqueSpec spec;
  spec.kind = k;
  switch (k) {
    case TechniqueKind::deeporder:
      spec.schema = FeatureSchema::for_family(FeatureFamily::deeporder);
      break;
    case TechniqueKind::coleman:
      spec.schema = FeatureSchema::for_family(FeatureFamily::coleman);
      break;
    default:
      spec.schema = FeatureSchema::for_family(FeatureFamily::bertolino_rl_family);
      break;
  }
  return spec;
}

Subject materialize_subject(const SubjectSpec& spec) {
  Subject subject;
  if (spec.source == SubjectSpec::Source::csv) {
    subject = load_subject(spec.path);
  } else {
    SynthConfig synth = spec.synth;
    if (!spec.name.empty()) synth.name = spec.name;
    subject = generate_synthetic(synth);
  }
  if (!spec.name.empty()) subject.name = spec.name;
  return subject;
}

void RunResult::append(RunResult other) {
  per_cycle.insert(per_cycle.end(), std::make_move_iterator(other.per_cycle.begin()),
                   std::make_move_iterator(other.per_cycle.end()));
  summary.insert(summary.end(), std::make_move_iterator(other.summary.begin()),
                 std::make_move_iterator(other.summary.end()));
}

void RunResult::sort_rows() {
  std::sort(per_cycle.begin(), per_cycle.end(), [](const CycleRow& a, const CycleRow& b) {
    if (a.subject != b.subject) return a.subject < b.subject;
    if (a.technique != b.technique) return a.technique < b.technique;
    if (a.protocol != b.protocol) return a.protocol < b.protocol;
    return a.cycle_index < b.cycle_index;
  });
  std::sort(summary.begin(), summary.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.subject != b.subject) return a.subject < b.subject;
    if (a.technique != b.technique) return a.technique < b.technique;
    return a.protocol < b.protocol;
  });
}

LabeledSet build_labeled_set(const Subject& subject, const FeatureMatrix& features,
                             std::size_t cycle_begin, std::size_t cycle_end,
                             bool heuristic_labels) {
  if (cycle_end > subject.cycles.size() || cycle_begin > cycle_end)
    throw std::invalid_argument("labeled set cycle range out of bounds");
  std::vector<std::vector<double>> heur;
  if (heuristic_labels) heur = heuristic_priority(subject);

  LabeledSet set;
  set.feature_width = features.width();
  set.groups.reserve(cycle_end - cycle_begin);
  for (std::size_t c = cycle_begin; c < cycle_end; ++c) {
    LabeledSet::Group g;
    g.x = features.values[c];
    const Cycle& cycle = subject.cycles[c];
    g.y.reserve(cycle.size());
    for (std::size_t r = 0; r < cycle.size(); ++r) {
      g.y.push_back(heuristic_labels
                        ? heur[c][r]
                        : static_cast<double>(verdict_value(cycle.records[r].verdict)));
    }
    set.groups.push_back(std::move(g));
  }
  return set;
}

ApplicabilityFlags applicability_flags(double mean_training_s, double mean_prediction_s,
                                       double avg_commit_interval_s,
                                       double mean_cycle_test_duration_s) {
  ApplicabilityFlags flags;
  flags.fits_commit_interval =
      mean_training_s + mean_prediction_s < avg_commit_interval_s;
  flags.worthwhile = mean_prediction_s < mean_cycle_test_duration_s;
  return flags;
}

namespace {

struct UnitOptions {
  std::string protocol = "baseline";
  bool use_smote = false;
  bool freeze_at_test_start = false;
  const Subject* pretrain_source = nullptr;  // SL warm start / RL pre-run
};

RankerModel fit_sl_model(TechniqueKind kind, const LabeledSet& set, const SLConfig& sl,
                         const RankerModel* warm) {
  switch (kind) {
    case TechniqueKind::mart:
      return fit_mart(set, sl.mart, warm);
    case TechniqueKind::lambdamart:
      return fit_lambdamart(set, sl.lambdamart, warm);
    case TechniqueKind::rankboost:
      return fit_rankboost(set, make_pairs(set), sl.rankboost, warm);
    case TechniqueKind::ranknet:
      return fit_ranknet(set, make_pairs(set), sl.ranknet, warm);
    case TechniqueKind::coordinate_ascent:
      return fit_coordinate_ascent(set, sl.coordinate_ascent, warm);
    case TechniqueKind::deeporder:
      return fit_deeporder(set, sl.deeporder, warm);
    default:
      throw std::logic_error("fit_sl_model called for a non-SL technique");
  }
}

std::unique_ptr<OnlineAgent> make_agent(TechniqueKind kind, const ExperimentConfig& cfg,
                                        std::size_t feature_width, std::uint64_t seed) {
  switch (kind) {
    case TechniqueKind::retecs: {
      RetecsConfig rc = cfg.retecs;
      rc.feature_width = static_cast<int>(feature_width);
      rc.seed = seed;
      return std::make_unique<RetecsAgent>(rc);
    }
    case TechniqueKind::coleman:
      return std::make_unique<ColemanAgent>(cfg.coleman);
    case TechniqueKind::policy_pointwise:
    case TechniqueKind::policy_pairwise:
    case TechniqueKind::policy_listwise: {
      PolicyConfig pc = cfg.policy;
      pc.feature_width = static_cast<int>(feature_width);
      pc.seed = seed;
      pc.formulation = kind == TechniqueKind::policy_pointwise ? Formulation::pointwise
                       : kind == TechniqueKind::policy_pairwise ? Formulation::pairwise
                                                                : Formulation::listwise;
      return std::make_unique<PolicyOnlineAgent>(pc);
    }
    default:
      throw std::logic_error("make_agent called for a non-online technique");
  }
}

SummaryRow summarize(const Subject& subject, const std::string& technique,
                     const UnitOptions& opt, const std::vector<CycleRow>& rows,
                     double sl_mean_training_s, bool sl_timing) {
  SummaryRow s;
  s.subject = subject.name;
  s.technique = technique;
  s.protocol = opt.protocol;
  s.test_cycles = rows.size();

  double rapfd_sum = 0.0, nrpa_sum = 0.0, pred_sum = 0.0, train_sum = 0.0, dur_sum = 0.0;
  std::size_t worthwhile_cycles = 0;
  std::vector<std::pair<double, double>> fail_times;
  for (const CycleRow& row : rows) {
    nrpa_sum += row.metrics.nrpa;
    pred_sum += row.prediction_s;
    train_sum += row.training_s;
    dur_sum += row.metrics.total_time;
    if (row.prediction_s < row.metrics.total_time) ++worthwhile_cycles;
    if (row.failures > 0) {
      ++s.failing_test_cycles;
      rapfd_sum += row.metrics.rapfd;
      fail_times.emplace_back(row.metrics.first_fail_time, row.metrics.total_time);
    }
  }
  if (!rows.empty()) {
    s.mean_nrpa = nrpa_sum / static_cast<double>(rows.size());
    s.mean_prediction_s = pred_sum / static_cast<double>(rows.size());
    s.mean_cycle_duration_s = dur_sum / static_cast<double>(rows.size());
    s.worthwhile_ratio =
        static_cast<double>(worthwhile_cycles) / static_cast<double>(rows.size());
  }
  if (s.failing_test_cycles > 0) {
    s.mean_rapfd = rapfd_sum / static_cast<double>(s.failing_test_cycles);
    s.ntr_value = ntr(fail_times);
  } else {
    s.note = "no failing test cycles; NTR omitted";
  }
  s.mean_training_s =
      sl_timing ? sl_mean_training_s
                : (rows.empty() ? 0.0 : train_sum / static_cast<double>(rows.size()));
  s.avg_commit_interval_s = subject.avg_commit_interval();
  s.failure_rate = subject.failure_rate();
  const ApplicabilityFlags flags = applicability_flags(
      s.mean_training_s, s.mean_prediction_s, s.avg_commit_interval_s, s.mean_cycle_duration_s);
  s.fits_commit_interval = flags.fits_commit_interval;
  s.worthwhile = flags.worthwhile;
  return s;
}

CycleRow make_row(const Subject& subject, const std::string& technique,
                  const UnitOptions& opt, std::size_t cycle_index, const RankedSequence& seq,
                  double prediction_s, double training_s) {
  const Cycle& cycle = subject.cycles[cycle_index];
  CycleRow row;
  row.subject = subject.name;
  row.technique = technique;
  row.protocol = opt.protocol;
  row.cycle_id = cycle.cycle_id;
  row.cycle_index = cycle_index;
  row.tests = cycle.size();
  row.failures = cycle.fail_count();
  row.metrics = evaluate_cycle(seq, cycle);
  row.prediction_s = prediction_s;
  row.training_s = training_s;
  return row;
}

// One (subject, technique, protocol) replay.
RunResult run_unit(const ExperimentConfig& cfg, const Subject& subject,
                   const TechniqueSpec& technique, const UnitOptions& opt) {
  const TechniqueKind kind = technique.kind;
  if (kind == TechniqueKind::deeporder &&
      technique.schema.family != FeatureFamily::deeporder)
    throw ConfigError("technique 'deeporder' requires the deeporder feature family");

  const TrainTestSplit split = split_train_test(subject, cfg.train_record_target);
  const std::string tech_name = to_string(kind);
  const std::uint64_t unit_seed = Rng::mix(
      cfg.seed, Rng::hash_name(subject.name + "/" + tech_name + "/" + opt.protocol));

  RunResult out;
  std::vector<CycleRow>& rows = out.per_cycle;
  rows.reserve(subject.cycles.size() - split.train_cycle_count);

  if (kind == TechniqueKind::oracle || kind == TechniqueKind::random_order) {
    for (std::size_t c = split.train_cycle_count; c < subject.cycles.size(); ++c) {
      const Cycle& cycle = subject.cycles[c];
      const double t0 = now_seconds();
      std::vector<double> scores(cycle.size());
      if (kind == TechniqueKind::oracle) {
        for (std::size_t r = 0; r < cycle.size(); ++r)
          scores[r] = static_cast<double>(verdict_value(cycle.records[r].verdict));
      } else {
        Rng rng(Rng::mix(unit_seed, c));
        for (double& v : scores) v = rng.uniform();
      }
      const RankedSequence seq = RankedSequence::from_scores(std::move(scores));
      rows.push_back(make_row(subject, tech_name, opt, c, seq, now_seconds() - t0, 0.0));
    }
    out.summary.push_back(summarize(subject, tech_name, opt, rows, 0.0, true));
    return out;
  }

  const FeatureMatrix features = build_features(subject, technique.schema);

  if (technique_is_sl(kind)) {
    const bool heuristic = kind == TechniqueKind::deeporder;
    double fit_time = 0.0;
    int fits = 0;

    const auto fit_on_prefix = [&](std::size_t end_cycle,
                                   const RankerModel* warm) -> RankerModel {
      LabeledSet set = build_labeled_set(subject, features, 0, end_cycle, heuristic);
      if (opt.use_smote) set = smote_augment(set, cfg.smote);
      const double t0 = now_seconds();
      RankerModel m = fit_sl_model(kind, set, cfg.sl, warm);
      fit_time += now_seconds() - t0;
      ++fits;
      return m;
    };

    RankerModel pretrained;
    const RankerModel* warm = nullptr;
    if (opt.pretrain_source != nullptr) {
      const FeatureMatrix src_features = build_features(*opt.pretrain_source, technique.schema);
      LabeledSet src_set = build_labeled_set(*opt.pretrain_source, src_features, 0,
                                             opt.pretrain_source->cycles.size(), heuristic);
      if (opt.use_smote) src_set = smote_augment(src_set, cfg.smote);
      const double t0 = now_seconds();
      pretrained = fit_sl_model(kind, src_set, cfg.sl, nullptr);
      fit_time += now_seconds() - t0;
      warm = &pretrained;
    }

    RankerModel model = fit_on_prefix(split.train_cycle_count, warm);
    std::size_t since_refit = 0;
    for (std::size_t c = split.train_cycle_count; c < subject.cycles.size(); ++c) {
      if (cfg.refit_every > 0 && since_refit == static_cast<std::size_t>(cfg.refit_every)) {
        model = fit_on_prefix(c, warm);
        since_refit = 0;
      }
      const double t0 = now_seconds();
      const RankedSequence seq = score_cycle(model, features.values[c]);
      rows.push_back(make_row(subject, tech_name, opt, c, seq, now_seconds() - t0, 0.0));
      ++since_refit;
    }
    const double mean_training =
        fit_time / static_cast<double>(std::max<std::size_t>(1, split.train_cycle_count));
    out.summary.push_back(summarize(subject, tech_name, opt, rows, mean_training, true));
    return out;
  }

  // Online techniques: learn through every cycle, measure on test cycles.
  std::unique_ptr<OnlineAgent> agent = make_agent(kind, cfg, features.width(), unit_seed);
  if (opt.pretrain_source != nullptr) {
    const FeatureMatrix src_features = build_features(*opt.pretrain_source, technique.schema);
    for (std::size_t c = 0; c < opt.pretrain_source->cycles.size(); ++c)
      online_cycle_update(*agent, opt.pretrain_source->cycles[c], src_features.values[c]);
  }
  for (std::size_t c = 0; c < subject.cycles.size(); ++c) {
    if (opt.freeze_at_test_start && c == split.train_cycle_count) agent->set_frozen(true);
    const OnlineStepResult step =
        online_cycle_update(*agent, subject.cycles[c], features.values[c]);
    if (c >= split.train_cycle_count) {
      rows.push_back(make_row(subject, tech_name, opt, c, step.sequence, step.prediction_s,
                              step.training_s));
    }
  }
  out.summary.push_back(summarize(subject, tech_name, opt, rows, 0.0, false));
  return out;
}

void validate_subjects(const std::vector<Subject>& subjects) {
  for (const Subject& s : subjects) {
    const std::vector<Violation> violations = validate_subject(s);
    if (!violations.empty())
      throw DataError("subject '" + s.name + "' is invalid: " + to_string(violations.front()) +
                      (violations.size() > 1
                           ? " (+" + std::to_string(violations.size() - 1) + " more)"
                           : ""));
  }
}

}  // namespace

RunResult replay(const ExperimentConfig& cfg) {
  if (cfg.subjects.empty()) throw ConfigError("experiment needs at least one subject");
  if (cfg.techniques.empty()) throw ConfigError("experiment needs at least one technique");
  std::vector<Subject> subjects;
  subjects.reserve(cfg.subjects.size());
  for (const auto& spec : cfg.subjects) subjects.push_back(materialize_subject(spec));
  validate_subjects(subjects);

  RunResult out;
  for (const Subject& subject : subjects) {
    for (const TechniqueSpec& technique : cfg.techniques)
      out.append(run_unit(cfg, subject, technique, UnitOptions{}));
  }
  out.sort_rows();
  return out;
}

RunResult pretrain_finetune(const ExperimentConfig& cfg, const SubjectSpec& source,
                            const SubjectSpec& target, const TechniqueSpec& technique) {
  if (!technique_warm_startable(technique.kind))
    throw ConfigError("technique '" + to_string(technique.kind) +
                      "' does not support warm-start pretraining");
  if (source.name == target.name)
    throw ConfigError("pretraining source and target must be different subjects");
  const Subject src = materialize_subject(source);
  const Subject tgt = materialize_subject(target);
  validate_subjects({src, tgt});

  UnitOptions pre;
  pre.protocol = "pretrain";
  pre.pretrain_source = &src;
  RunResult out = run_unit(cfg, tgt, technique, pre);

  UnitOptions scratch;
  scratch.protocol = "scratch";
  out.append(run_unit(cfg, tgt, technique, scratch));
  out.sort_rows();
  return out;
}

EarlyStopResult early_stop_compare(const ExperimentConfig& cfg, const SubjectSpec& subject,
                                   const TechniqueSpec& technique) {
  if (!technique_is_rl(technique.kind))
    throw ConfigError("early-stop comparison applies to online techniques; '" +
                      to_string(technique.kind) + "' is not one");
  const Subject subj = materialize_subject(subject);
  validate_subjects({subj});

  UnitOptions opt;
  opt.protocol = "early_stop";
  opt.freeze_at_test_start = true;
  EarlyStopResult result;
  result.rows = run_unit(cfg, subj, technique, opt);

  std::vector<double> failing_rapfd;
  for (const CycleRow& row : result.rows.per_cycle)
    if (row.failures > 0) failing_rapfd.push_back(row.metrics.rapfd);
  result.failing_test_cycles = failing_rapfd.size();
  if (failing_rapfd.empty())
    throw DataError("early-stop comparison: no failing test cycles on subject '" + subj.name +
                    "'");
  result.window = failing_rapfd.size() >= 60 ? 30 : failing_rapfd.size() / 2;
  if (result.window == 0)
    throw DataError("early-stop comparison needs at least 2 failing test cycles");
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < result.window; ++i) {
    first += failing_rapfd[i];
    last += failing_rapfd[failing_rapfd.size() - result.window + i];
  }
  result.first_mean = first / static_cast<double>(result.window);
  result.last_mean = last / static_cast<double>(result.window);
  if (!result.rows.summary.empty()) {
    result.rows.summary.front().note =
        "early-stop windows of " + std::to_string(result.window) + " failing cycles";
  }
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.subjects.empty()) throw ConfigError("experiment needs at least one subject");
  if (cfg.techniques.empty()) throw ConfigError("experiment needs at least one technique");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");

  std::vector<Subject> subjects;
  subjects.reserve(cfg.subjects.size());
  for (const auto& spec : cfg.subjects) subjects.push_back(materialize_subject(spec));
  validate_subjects(subjects);

  std::ptrdiff_t source_idx = -1;
  if (cfg.protocols.pretrain) {
    for (std::size_t i = 0; i < cfg.subjects.size(); ++i)
      if (cfg.subjects[i].name == cfg.protocols.pretrain_source)
        source_idx = static_cast<std::ptrdiff_t>(i);
    if (source_idx < 0)
      throw ConfigError("pretrain source subject '" + cfg.protocols.pretrain_source +
                        "' is not in the subject list");
    for (const TechniqueSpec& t : cfg.techniques)
      if (!technique_warm_startable(t.kind))
        throw ConfigError("technique '" + to_string(t.kind) +
                          "' does not support warm-start pretraining");
  }
  for (const TechniqueSpec& t : cfg.techniques) {
    if (t.kind == TechniqueKind::deeporder && t.schema.family != FeatureFamily::deeporder)
      throw ConfigError("technique 'deeporder' requires the deeporder feature family");
  }

  struct Task {
    std::size_t subject = 0;
    std::size_t technique = 0;
    UnitOptions opt;
    bool early_stop = false;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    for (std::size_t t = 0; t < cfg.techniques.size(); ++t) {
      const TechniqueKind kind = cfg.techniques[t].kind;
      if (cfg.protocols.baseline) tasks.push_back({s, t, UnitOptions{}, false});
      if (cfg.protocols.smote && verdict_labeled_sl(kind)) {
        UnitOptions opt;
        opt.protocol = "smote";
        opt.use_smote = true;
        tasks.push_back({s, t, opt, false});
      }
      if (cfg.protocols.pretrain && static_cast<std::ptrdiff_t>(s) != source_idx) {
        UnitOptions pre;
        pre.protocol = "pretrain";
        pre.pretrain_source = &subjects[static_cast<std::size_t>(source_idx)];
        tasks.push_back({s, t, pre, false});
        UnitOptions scratch;
        scratch.protocol = "scratch";
        tasks.push_back({s, t, scratch, false});
      }
      if (cfg.protocols.early_stop && technique_is_rl(kind)) {
        UnitOptions opt;
        opt.protocol = "early_stop";
        opt.freeze_at_test_start = true;
        tasks.push_back({s, t, opt, true});
      }
    }
  }

  std::vector<RunResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), std::max<std::size_t>(1, tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          const Task& task = tasks[i];
          results[i] = run_unit(cfg, subjects[task.subject], cfg.techniques[task.technique],
                                task.opt);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  RunResult out;
  for (auto& r : results) out.append(std::move(r));
  out.sort_rows();
  return out;
}

}  // namespace citcp
