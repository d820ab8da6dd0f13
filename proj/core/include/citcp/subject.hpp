#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace citcp {

enum class Verdict : int { pass = 0, fail = 1 };

inline int verdict_value(Verdict v) { return static_cast<int>(v); }

// One execution of one test inside one CI cycle. `features` holds the values
// of the subject's extra feature columns, aligned with Subject::feature_names.
struct TestRecord {
  std::string test_id;
  double duration_s = 0.0;
  Verdict verdict = Verdict::pass;
  std::vector<double> features;

  friend bool operator==(const TestRecord&, const TestRecord&) = default;
};

// One CI cycle: the tests executed against one revision. Record order is the
// order the suite was scheduled in; it is the tie-break reference everywhere.
struct Cycle {
  std::int64_t cycle_id = 0;
  std::int64_t commit_timestamp = 0;  // seconds
  std::vector<TestRecord> records;

  std::size_t size() const { return records.size(); }
  int fail_count() const;
  bool has_failure() const { return fail_count() > 0; }
  double total_duration() const;

  friend bool operator==(const Cycle&, const Cycle&) = default;
};

// A full CI history for one project. Cycles are kept in ascending
// commit_timestamp order with strictly increasing cycle ids.
struct Subject {
  std::string name;
  std::vector<std::string> feature_names;  // extra columns beyond the core five
  std::vector<Cycle> cycles;

  std::size_t total_records() const;
  std::size_t total_failures() const;
  std::size_t failing_cycle_count() const;
  double failure_rate() const;          // total_failures / total_records
  double avg_commit_interval() const;   // mean timestamp delta, 0 if < 2 cycles

  friend bool operator==(const Subject&, const Subject&) = default;
};

// A prioritized ordering of one cycle. order[p] is the record index scheduled
// at position p. scores[i] is the priority of record i; higher runs earlier,
// ties resolved by record index.
struct RankedSequence {
  std::vector<std::size_t> order;
  std::vector<double> scores;

  static RankedSequence from_scores(std::vector<double> scores);
  static RankedSequence identity(std::size_t n);

  // 1-based rank per record index (inverse of `order`).
  std::vector<std::size_t> ranks() const;

  friend bool operator==(const RankedSequence&, const RankedSequence&) = default;
};

struct Violation {
  std::int64_t cycle_id = 0;   // 0 when the rule is subject-level
  std::string test_id;         // empty when the rule is cycle-level
  std::string rule;
};

std::string to_string(const Violation& v);

// Structural checks: non-empty cycles, unique non-empty test ids per cycle,
// non-negative durations, strictly increasing cycle ids, ascending
// timestamps, feature vectors matching feature_names. Returns every
// violation found rather than stopping at the first.
std::vector<Violation> validate_subject(const Subject& subject);

// The reference ordering used by rank-proximity scoring: failing tests first,
// then within each verdict group ascending duration, ties by record index.
RankedSequence optimal_sequence(const Cycle& cycle);

// Subjects are grouped by overall failure rate; "more failure" means a rate
// strictly above 1%.
enum class SubjectClass { more_failure, less_failure };
bool is_more_failure(double failure_rate);
SubjectClass classify_subject(const Subject& subject);
std::string to_string(SubjectClass c);

}  // namespace citcp
