#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "citcp/features.hpp"
#include "citcp/metrics.hpp"
#include "citcp/rl_agents.hpp"
#include "citcp/sl_rankers.hpp"
#include "citcp/subject.hpp"
#include "citcp/synth.hpp"

namespace citcp {

// Prioritization techniques runnable by the harness. oracle and random_order
// are diagnostic bounds: oracle reads verdicts (upper bound), random_order is
// the seeded chance baseline.
enum class TechniqueKind {
  oracle,
  random_order,
  mart,
  lambdamart,
  rankboost,
  ranknet,
  coordinate_ascent,
  deeporder,
  retecs,
  coleman,
  policy_pointwise,
  policy_pairwise,
  policy_listwise,
};

TechniqueKind technique_from_string(const std::string& s);
std::string to_string(TechniqueKind k);
bool technique_is_rl(TechniqueKind k);      // learns online, cycle by cycle
bool technique_is_sl(TechniqueKind k);      // fit once on the training prefix
bool technique_warm_startable(TechniqueKind k);

struct TechniqueSpec {
  TechniqueKind kind = TechniqueKind::random_order;
  FeatureSchema schema;  // resolved for the technique's family

  static TechniqueSpec for_kind(TechniqueKind k);
};

struct SubjectSpec {
  enum class Source { csv, synth };
  Source source = Source::csv;
  std::string name;
  std::string path;   // csv source
  SynthConfig synth;  // synth source
};

Subject materialize_subject(const SubjectSpec& spec);

struct ProtocolSet {
  bool baseline = true;
  bool smote = false;
  bool pretrain = false;
  bool early_stop = false;
  std::string pretrain_source;  // subject name; must differ from targets
};

struct SmoteConfig {
  int k_neighbors = 5;
  double target_ratio = 0.5;  // failing fraction after augmentation
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::vector<SubjectSpec> subjects;
  std::vector<TechniqueSpec> techniques;
  std::size_t train_record_target = 2000;
  std::uint64_t seed = 42;
  int refit_every = 0;  // SL: refit after every N test cycles; 0 = fit once
  int jobs = 1;
  std::string out_dir;
  ProtocolSet protocols;
  SmoteConfig smote;
  SLConfig sl;
  PolicyConfig policy;   // template; formulation and width resolved per run
  RetecsConfig retecs;   // template; width resolved per run
  ColemanConfig coleman;
};

// One evaluated test cycle. apfd/rapfd/first_fail_time are NaN on passing
// cycles; timing is wall-clock and excluded from determinism guarantees.
struct CycleRow {
  std::string subject;
  std::string technique;
  std::string protocol;
  std::int64_t cycle_id = 0;
  std::size_t cycle_index = 0;
  std::size_t tests = 0;
  int failures = 0;
  CycleMetrics metrics;
  double prediction_s = 0.0;
  double training_s = 0.0;
};

struct SummaryRow {
  std::string subject;
  std::string technique;
  std::string protocol;
  std::size_t test_cycles = 0;
  std::size_t failing_test_cycles = 0;
  double mean_rapfd = std::numeric_limits<double>::quiet_NaN();
  double mean_nrpa = std::numeric_limits<double>::quiet_NaN();
  double ntr_value = std::numeric_limits<double>::quiet_NaN();
  double mean_prediction_s = 0.0;
  double mean_training_s = 0.0;
  double avg_commit_interval_s = 0.0;
  double mean_cycle_duration_s = 0.0;
  bool fits_commit_interval = false;
  bool worthwhile = false;
  double worthwhile_ratio = 0.0;
  double failure_rate = 0.0;  // subject-level, all records
  std::string note;
};

struct RunResult {
  std::vector<CycleRow> per_cycle;
  std::vector<SummaryRow> summary;

  void append(RunResult other);
  void sort_rows();
};

// Training instances for cycles [cycle_begin, cycle_end); labels are
// verdicts, or heuristic priorities when heuristic_labels is set.
LabeledSet build_labeled_set(const Subject& subject, const FeatureMatrix& features,
                             std::size_t cycle_begin, std::size_t cycle_end,
                             bool heuristic_labels);

// Minority oversampling by interpolation toward nearest failing neighbors.
// Synthetic instances join their source instance's group. Throws DataError
// with fewer than 2 failing instances.
LabeledSet smote_augment(const LabeledSet& train, const SmoteConfig& cfg);

// Chronological replay of every (subject x technique) pair under the
// baseline protocol: SL fits once on the training prefix and scores test
// cycles; RL updates online through all cycles. Rows cover test cycles only.
RunResult replay(const ExperimentConfig& cfg);

// Full train on source, continued training on the target's training prefix,
// evaluation on the target's test cycles. Emits "pretrain" rows and the
// matching "scratch" rows. Throws for techniques without warm-start.
RunResult pretrain_finetune(const ExperimentConfig& cfg, const SubjectSpec& source,
                            const SubjectSpec& target, const TechniqueSpec& technique);

// Replay with the agent frozen once the training prefix ends, then mean
// rAPFD over the first and last windows of failing test cycles (30 each, or
// floor(half) when fewer than 60 exist).
struct EarlyStopResult {
  double first_mean = 0.0;
  double last_mean = 0.0;
  std::size_t window = 0;
  std::size_t failing_test_cycles = 0;
  RunResult rows;
};

EarlyStopResult early_stop_compare(const ExperimentConfig& cfg, const SubjectSpec& subject,
                                   const TechniqueSpec& technique);

// All enabled protocols, parallelized over (subject x technique x protocol)
// with cfg.jobs workers; output order is deterministic.
RunResult run_experiment(const ExperimentConfig& cfg);

struct ApplicabilityFlags {
  bool fits_commit_interval = false;  // mean train + predict < commit interval
  bool worthwhile = false;            // mean predict < mean cycle test duration
};

ApplicabilityFlags applicability_flags(double mean_training_s, double mean_prediction_s,
                                       double avg_commit_interval_s,
                                       double mean_cycle_test_duration_s);

}  // namespace citcp
