#include "citcp/subject.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace citcp {

int Cycle::fail_count() const {
  int m = 0;
  for (const auto& r : records) m += verdict_value(r.verdict);
  return m;
}

double Cycle::total_duration() const {
  double s = 0.0;
  for (const auto& r : records) s += r.duration_s;
  return s;
}

std::size_t Subject::total_records() const {
  std::size_t n = 0;
  for (const auto& c : cycles) n += c.records.size();
  return n;
}

std::size_t Subject::total_failures() const {
  std::size_t m = 0;
  for (const auto& c : cycles) m += static_cast<std::size_t>(c.fail_count());
  return m;
}

std::size_t Subject::failing_cycle_count() const {
  std::size_t n = 0;
  for (const auto& c : cycles) n += c.has_failure() ? 1 : 0;
  return n;
}

double Subject::failure_rate() const {
  const std::size_t n = total_records();
  if (n == 0) return 0.0;
  return static_cast<double>(total_failures()) / static_cast<double>(n);
}

double Subject::avg_commit_interval() const {
  if (cycles.size() < 2) return 0.0;
  double span = static_cast<double>(cycles.back().commit_timestamp -
                                    cycles.front().commit_timestamp);
  return span / static_cast<double>(cycles.size() - 1);
}

RankedSequence RankedSequence::from_scores(std::vector<double> scores) {
  RankedSequence seq;
  seq.order.resize(scores.size());
  std::iota(seq.order.begin(), seq.order.end(), std::size_t{0});
  std::stable_sort(seq.order.begin(), seq.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  seq.scores = std::move(scores);
  return seq;
}

RankedSequence RankedSequence::identity(std::size_t n) {
  RankedSequence seq;
  seq.order.resize(n);
  std::iota(seq.order.begin(), seq.order.end(), std::size_t{0});
  seq.scores.resize(n);
  for (std::size_t p = 0; p < n; ++p) seq.scores[p] = static_cast<double>(n - p);
  return seq;
}

std::vector<std::size_t> RankedSequence::ranks() const {
  std::vector<std::size_t> r(order.size(), 0);
  for (std::size_t p = 0; p < order.size(); ++p) r[order[p]] = p + 1;
  return r;
}

std::string to_string(const Violation& v) {
  std::string s = "cycle " + std::to_string(v.cycle_id);
  if (!v.test_id.empty()) s += ", test '" + v.test_id + "'";
  s += ": " + v.rule;
  return s;
}

std::vector<Violation> validate_subject(const Subject& subject) {
  std::vector<Violation> out;
  if (subject.cycles.empty()) {
    out.push_back({0, "", "subject has no cycles"});
    return out;
  }
  const std::size_t width = subject.feature_names.size();
  for (std::size_t i = 0; i < subject.cycles.size(); ++i) {
    const Cycle& c = subject.cycles[i];
    if (c.records.empty())
      out.push_back({c.cycle_id, "", "cycle has no records"});
    if (i > 0) {
      const Cycle& prev = subject.cycles[i - 1];
      if (c.cycle_id <= prev.cycle_id)
        out.push_back({c.cycle_id, "", "cycle id not strictly increasing"});
      if (c.commit_timestamp < prev.commit_timestamp)
        out.push_back({c.cycle_id, "", "commit timestamp decreases"});
    }
    std::unordered_set<std::string> seen;
    for (const auto& r : c.records) {
      if (r.test_id.empty())
        out.push_back({c.cycle_id, "", "empty test id"});
      else if (!seen.insert(r.test_id).second)
        out.push_back({c.cycle_id, r.test_id, "duplicate test id in cycle"});
      if (r.duration_s < 0.0)
        out.push_back({c.cycle_id, r.test_id, "negative duration"});
      if (!std::isfinite(r.duration_s))
        out.push_back({c.cycle_id, r.test_id, "non-finite duration"});
      if (r.features.size() != width)
        out.push_back({c.cycle_id, r.test_id, "feature vector width mismatch"});
    }
  }
  return out;
}

RankedSequence optimal_sequence(const Cycle& cycle) {
  const std::size_t k = cycle.size();
  RankedSequence seq;
  seq.order.resize(k);
  std::iota(seq.order.begin(), seq.order.end(), std::size_t{0});
  std::stable_sort(seq.order.begin(), seq.order.end(), [&](std::size_t a, std::size_t b) {
    const TestRecord& ra = cycle.records[a];
    const TestRecord& rb = cycle.records[b];
    if (ra.verdict != rb.verdict) return verdict_value(ra.verdict) > verdict_value(rb.verdict);
    return ra.duration_s < rb.duration_s;
  });
  seq.scores.resize(k);
  for (std::size_t p = 0; p < k; ++p)
    seq.scores[seq.order[p]] = static_cast<double>(k - p);
  return seq;
}

bool is_more_failure(double failure_rate) { return failure_rate > 0.01; }

SubjectClass classify_subject(const Subject& subject) {
  return is_more_failure(subject.failure_rate()) ? SubjectClass::more_failure
                                                 : SubjectClass::less_failure;
}

std::string to_string(SubjectClass c) {
  return c == SubjectClass::more_failure ? "more_failure" : "less_failure";
}

}  // namespace citcp
