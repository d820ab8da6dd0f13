#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "citcp/errors.hpp"
#include "citcp/harness.hpp"
#include "doctest.h"

using namespace citcp;

namespace {

SubjectSpec synth_spec(const std::string& name, int cycles, int tests, double rate,
                       std::uint64_t seed) {
  SubjectSpec spec;
  spec.source = SubjectSpec::Source::synth;
  spec.name = name;
  spec.synth.name = name;
  spec.synth.cycles = cycles;
  spec.synth.tests_per_cycle = tests;
  spec.synth.failure_rate_target = rate;
  spec.synth.seed = seed;
  return spec;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.train_record_target = 200;
  cfg.sl.mart.stages = 10;
  cfg.sl.ranknet.hidden = {4};
  cfg.sl.ranknet.epochs = 10;
  cfg.sl.coordinate_ascent.restarts = 2;
  cfg.sl.coordinate_ascent.sweeps = 5;
  cfg.policy.hidden = {4};
  cfg.policy.episodes_per_cycle = 3;
  cfg.retecs.epochs_per_cycle = 2;
  return cfg;
}

// Everything except wall-clock timing, for determinism comparisons.
struct RowKey {
  std::string subject, technique, protocol;
  std::int64_t cycle_id;
  std::size_t tests;
  int failures;
  double apfd, rapfd, nrpa, fft, total;

  bool operator==(const RowKey&) const = default;
};

std::vector<RowKey> keys_of(const RunResult& r) {
  std::vector<RowKey> out;
  out.reserve(r.per_cycle.size());
  for (const CycleRow& row : r.per_cycle) {
    const auto nan_safe = [](double v) { return std::isnan(v) ? -777.0 : v; };
    out.push_back({row.subject, row.technique, row.protocol, row.cycle_id, row.tests,
                   row.failures, nan_safe(row.metrics.apfd), nan_safe(row.metrics.rapfd),
                   nan_safe(row.metrics.nrpa), nan_safe(row.metrics.first_fail_time),
                   row.metrics.total_time});
  }
  return out;
}

const SummaryRow& summary_for(const RunResult& r, const std::string& technique,
                              const std::string& protocol = "baseline") {
  for (const SummaryRow& s : r.summary)
    if (s.technique == technique && s.protocol == protocol) return s;
  REQUIRE_MESSAGE(false, "no summary row for " << technique << "/" << protocol);
  static SummaryRow dummy;
  return dummy;
}

}  // namespace

TEST_CASE("labeled sets slice cycles and carry the requested labels") {
  const Subject subject = materialize_subject(synth_spec("lab", 8, 6, 0.3, 11));
  const TechniqueSpec mart = TechniqueSpec::for_kind(TechniqueKind::mart);
  const FeatureMatrix features = build_features(subject, mart.schema);

  const LabeledSet verdicts = build_labeled_set(subject, features, 2, 6, false);
  REQUIRE(verdicts.groups.size() == 4);
  CHECK(verdicts.feature_width == features.width());
  for (std::size_t g = 0; g < 4; ++g) {
    const Cycle& cycle = subject.cycles[2 + g];
    CHECK(verdicts.groups[g].x == features.values[2 + g]);
    REQUIRE(verdicts.groups[g].y.size() == cycle.size());
    for (std::size_t r = 0; r < cycle.size(); ++r)
      CHECK(verdicts.groups[g].y[r] ==
            (cycle.records[r].verdict == Verdict::fail ? 1.0 : 0.0));
  }

  const TechniqueSpec deep = TechniqueSpec::for_kind(TechniqueKind::deeporder);
  const FeatureMatrix deep_features = build_features(subject, deep.schema);
  const LabeledSet heur = build_labeled_set(subject, deep_features, 2, 6, true);
  const HeuristicWeights w;
  bool any_fractional = false;
  for (const auto& g : heur.groups)
    for (double y : g.y) {
      CHECK(y >= -w.duration_penalty - 1e-12);
      CHECK(y <= w.w1 + w.w2 + w.w3 + 1e-12);
      if (y != 0.0 && y != 1.0) any_fractional = true;
    }
  CHECK(any_fractional);  // priorities are graded, not verdict copies
}

TEST_CASE("oracle replays are perfect and beat the chance baseline") {
  ExperimentConfig cfg = small_config();
  cfg.subjects = {synth_spec("ora", 80, 10, 0.15, 3)};
  cfg.techniques = {TechniqueSpec::for_kind(TechniqueKind::oracle),
                    TechniqueSpec::for_kind(TechniqueKind::random_order)};
  const RunResult result = replay(cfg);

  const SummaryRow& oracle = summary_for(result, "oracle");
  const SummaryRow& random = summary_for(result, "random");
  REQUIRE(oracle.failing_test_cycles > 10);
  CHECK(oracle.mean_rapfd == doctest::Approx(1.0));
  for (const CycleRow& row : result.per_cycle)
    if (row.technique == "oracle" && row.failures > 0)
      CHECK(row.metrics.rapfd == doctest::Approx(1.0));

  CHECK(random.mean_rapfd > 0.3);
  CHECK(random.mean_rapfd < 0.7);
  CHECK(oracle.mean_rapfd > random.mean_rapfd);
  CHECK(oracle.ntr_value > random.ntr_value);
  CHECK(oracle.test_cycles == random.test_cycles);
}

TEST_CASE("replays are deterministic across invocations") {
  ExperimentConfig cfg = small_config();
  cfg.subjects = {synth_spec("det", 30, 8, 0.2, 17)};
  cfg.techniques = {TechniqueSpec::for_kind(TechniqueKind::mart),
                    TechniqueSpec::for_kind(TechniqueKind::coleman),
                    TechniqueSpec::for_kind(TechniqueKind::retecs),
                    TechniqueSpec::for_kind(TechniqueKind::policy_pointwise)};
  const RunResult a = replay(cfg);
  const RunResult b = replay(cfg);
  CHECK(keys_of(a) == keys_of(b));
  REQUIRE(a.summary.size() == b.summary.size());
  for (std::size_t i = 0; i < a.summary.size(); ++i) {
    CHECK(a.summary[i].technique == b.summary[i].technique);
    const auto eq = [](double x, double y) {
      return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    CHECK(eq(a.summary[i].mean_rapfd, b.summary[i].mean_rapfd));
    CHECK(eq(a.summary[i].mean_nrpa, b.summary[i].mean_nrpa));
    CHECK(eq(a.summary[i].ntr_value, b.summary[i].ntr_value));
  }
}

TEST_CASE("worker count changes nothing but the wall clock") {
  ExperimentConfig cfg = small_config();
  cfg.train_record_target = 60;
  cfg.subjects = {synth_spec("jobs-a", 24, 8, 0.2, 5), synth_spec("jobs-b", 24, 8, 0.2, 6)};
  cfg.techniques = {TechniqueSpec::for_kind(TechniqueKind::oracle),
                    TechniqueSpec::for_kind(TechniqueKind::mart),
                    TechniqueSpec::for_kind(TechniqueKind::coleman)};
  cfg.protocols.smote = true;

  cfg.jobs = 1;
  const RunResult serial = run_experiment(cfg);
  cfg.jobs = 4;
  const RunResult parallel = run_experiment(cfg);
  CHECK(keys_of(serial) == keys_of(parallel));

  ExperimentConfig bad = cfg;
  bad.jobs = 0;
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("oversampling applies to verdict-trained rankers only") {
  ExperimentConfig cfg = small_config();
  cfg.subjects = {synth_spec("sm", 30, 8, 0.2, 9)};
  cfg.techniques = {TechniqueSpec::for_kind(TechniqueKind::mart),
                    TechniqueSpec::for_kind(TechniqueKind::deeporder),
                    TechniqueSpec::for_kind(TechniqueKind::coleman),
                    TechniqueSpec::for_kind(TechniqueKind::random_order)};
  cfg.protocols.smote = true;
  const RunResult result = run_experiment(cfg);

  std::set<std::string> smote_techniques;
  for (const SummaryRow& s : result.summary)
    if (s.protocol == "smote") smote_techniques.insert(s.technique);
  CHECK(smote_techniques == std::set<std::string>{"mart"});

  // The oversampled variant is judged on exactly the same test cycles.
  std::vector<std::int64_t> base_ids, smote_ids;
  for (const CycleRow& row : result.per_cycle) {
    if (row.technique != "mart") continue;
    if (row.protocol == "baseline") base_ids.push_back(row.cycle_id);
    if (row.protocol == "smote") smote_ids.push_back(row.cycle_id);
  }
  CHECK(base_ids == smote_ids);
  REQUIRE(!base_ids.empty());
}

TEST_CASE("pretraining emits matched pretrain and scratch rows") {
  ExperimentConfig cfg = small_config();
  const SubjectSpec source = synth_spec("src", 30, 8, 0.2, 21);
  const SubjectSpec target = synth_spec("tgt", 30, 8, 0.2, 22);
  const RunResult result =
      pretrain_finetune(cfg, source, target, TechniqueSpec::for_kind(TechniqueKind::ranknet));

  std::vector<std::int64_t> pre_ids, scratch_ids;
  for (const CycleRow& row : result.per_cycle) {
    CHECK(row.subject == "tgt");
    if (row.protocol == "pretrain") pre_ids.push_back(row.cycle_id);
    if (row.protocol == "scratch") scratch_ids.push_back(row.cycle_id);
  }
  REQUIRE(!pre_ids.empty());
  CHECK(pre_ids == scratch_ids);
  CHECK(result.summary.size() == 2);

  CHECK_THROWS_AS(
      pretrain_finetune(cfg, source, source, TechniqueSpec::for_kind(TechniqueKind::ranknet)),
      ConfigError);
  CHECK_THROWS_AS(
      pretrain_finetune(cfg, source, target, TechniqueSpec::for_kind(TechniqueKind::oracle)),
      ConfigError);
}

TEST_CASE("early-stop windows adapt to the failing cycle count") {
  ExperimentConfig cfg = small_config();
  cfg.subjects = {synth_spec("es", 140, 10, 0.25, 31)};
  const SubjectSpec& spec = cfg.subjects.front();

  const EarlyStopResult big =
      early_stop_compare(cfg, spec, TechniqueSpec::for_kind(TechniqueKind::coleman));
  REQUIRE(big.failing_test_cycles >= 60);
  CHECK(big.window == 30);
  CHECK(big.first_mean >= 0.0);
  CHECK(big.first_mean <= 1.0);
  CHECK(big.last_mean >= 0.0);
  CHECK(big.last_mean <= 1.0);
  for (const CycleRow& row : big.rows.per_cycle) CHECK(row.protocol == "early_stop");

  const SubjectSpec tiny = synth_spec("es-tiny", 16, 6, 0.25, 32);
  cfg.train_record_target = 24;  // 4 of the 16 cycles train, 12 test
  const EarlyStopResult small =
      early_stop_compare(cfg, tiny, TechniqueSpec::for_kind(TechniqueKind::coleman));
  CHECK(small.failing_test_cycles < 60);
  CHECK(small.window == small.failing_test_cycles / 2);

  CHECK_THROWS_AS(early_stop_compare(cfg, spec, TechniqueSpec::for_kind(TechniqueKind::mart)),
                  ConfigError);
}

TEST_CASE("early-stop needs failing cycles to measure anything") {
  const std::string path = "citcp_allpass.csv";
  {
    std::ofstream out(path);
    out << "cycle_id,commit_timestamp,test_id,duration_s,verdict\n";
    for (int c = 1; c <= 4; ++c)
      for (int t = 0; t < 3; ++t)
        out << c << "," << 1000 * c << ",t" << t << ",1.0,0\n";
  }
  SubjectSpec spec;
  spec.source = SubjectSpec::Source::csv;
  spec.name = "allpass";
  spec.path = path;

  ExperimentConfig cfg = small_config();
  cfg.train_record_target = 6;  // 2 cycles of training, 2 of testing
  CHECK_THROWS_AS(
      early_stop_compare(cfg, spec, TechniqueSpec::for_kind(TechniqueKind::coleman)),
      DataError);
  std::remove(path.c_str());
}

TEST_CASE("summary rows agree with their per-cycle rows") {
  ExperimentConfig cfg = small_config();
  cfg.subjects = {synth_spec("sum", 50, 8, 0.2, 41)};
  cfg.techniques = {TechniqueSpec::for_kind(TechniqueKind::mart)};
  const RunResult result = replay(cfg);
  const SummaryRow& s = summary_for(result, "mart");

  double rapfd_sum = 0.0, nrpa_sum = 0.0;
  std::size_t failing = 0;
  std::vector<std::pair<double, double>> fail_times;
  for (const CycleRow& row : result.per_cycle) {
    nrpa_sum += row.metrics.nrpa;
    if (row.failures > 0) {
      ++failing;
      rapfd_sum += row.metrics.rapfd;
      fail_times.emplace_back(row.metrics.first_fail_time, row.metrics.total_time);
    }
  }
  REQUIRE(failing > 0);
  CHECK(s.test_cycles == result.per_cycle.size());
  CHECK(s.failing_test_cycles == failing);
  CHECK(s.mean_rapfd == doctest::Approx(rapfd_sum / static_cast<double>(failing)));
  CHECK(s.mean_nrpa ==
        doctest::Approx(nrpa_sum / static_cast<double>(result.per_cycle.size())));
  CHECK(s.ntr_value == doctest::Approx(ntr(fail_times)));
}

TEST_CASE("applicability compares technique cost against project rhythm") {
  // Slow training still fits inside a long commit interval.
  const ApplicabilityFlags roomy = applicability_flags(300.0, 8.0, 11236.82, 33.0);
  CHECK(roomy.fits_commit_interval);
  // A prediction that outlasts the suite itself is not worthwhile.
  const ApplicabilityFlags slow_predict = applicability_flags(0.0, 308.0, 11236.82, 33.0);
  CHECK_FALSE(slow_predict.worthwhile);
  const ApplicabilityFlags quick = applicability_flags(0.5, 0.2, 3600.0, 33.0);
  CHECK(quick.fits_commit_interval);
  CHECK(quick.worthwhile);
  const ApplicabilityFlags cramped = applicability_flags(4000.0, 10.0, 3600.0, 33.0);
  CHECK_FALSE(cramped.fits_commit_interval);
}

TEST_CASE("mismatched feature families are rejected up front") {
  ExperimentConfig cfg = small_config();
  cfg.subjects = {synth_spec("fam", 20, 6, 0.2, 51)};
  TechniqueSpec wrong;
  wrong.kind = TechniqueKind::deeporder;
  wrong.schema = FeatureSchema::for_family(FeatureFamily::bertolino_rl_family);
  cfg.techniques = {wrong};
  CHECK_THROWS_AS(replay(cfg), ConfigError);
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

  ExperimentConfig empty = small_config();
  empty.subjects = {synth_spec("fam2", 20, 6, 0.2, 52)};
  CHECK_THROWS_AS(replay(empty), ConfigError);  // no techniques
  empty.techniques = {TechniqueSpec::for_kind(TechniqueKind::oracle)};
  empty.subjects.clear();
  CHECK_THROWS_AS(replay(empty), ConfigError);  // no subjects
}

TEST_CASE("technique names round-trip") {
  const std::vector<TechniqueKind> kinds = {
      TechniqueKind::oracle,          TechniqueKind::random_order,
      TechniqueKind::mart,            TechniqueKind::lambdamart,
      TechniqueKind::rankboost,       TechniqueKind::ranknet,
      TechniqueKind::coordinate_ascent, TechniqueKind::deeporder,
      TechniqueKind::retecs,          TechniqueKind::coleman,
      TechniqueKind::policy_pointwise, TechniqueKind::policy_pairwise,
      TechniqueKind::policy_listwise};
  for (TechniqueKind k : kinds) CHECK(technique_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(technique_from_string("nonsense"), ConfigError);
}
