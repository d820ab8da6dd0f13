#include "citcp/metrics.hpp"

#include <stdexcept>

#include "citcp/errors.hpp"

namespace citcp {

namespace {

void require_same_size(const RankedSequence& seq, const Cycle& cycle) {
  if (seq.order.size() != cycle.size())
    throw std::invalid_argument("sequence and cycle sizes differ");
}

}  // namespace

double apfd(const RankedSequence& seq, const Cycle& cycle) {
  require_same_size(seq, cycle);
  const int m = cycle.fail_count();
  if (m == 0) throw DataError("APFD undefined on passing cycles");
  const double k = static_cast<double>(cycle.size());
  double rank_sum = 0.0;
  for (std::size_t p = 0; p < seq.order.size(); ++p) {
    if (cycle.records[seq.order[p]].verdict == Verdict::fail)
      rank_sum += static_cast<double>(p + 1);
  }
  return 1.0 - rank_sum / (k * m) + 1.0 / (2.0 * k);
}

std::pair<double, double> apfd_bounds(const Cycle& cycle) {
  const int m = cycle.fail_count();
  if (m == 0) throw DataError("APFD undefined on passing cycles");
  const double k = static_cast<double>(cycle.size());
  const double half = m / (2.0 * k);
  return {half, 1.0 - half};
}

double rapfd(const RankedSequence& seq, const Cycle& cycle) {
  const auto [lo, hi] = apfd_bounds(cycle);
  if (hi == lo) return 1.0;
  return (apfd(seq, cycle) - lo) / (hi - lo);
}

double rpa(const RankedSequence& seq, const RankedSequence& optimal) {
  if (seq.order.size() != optimal.order.size())
    throw std::invalid_argument("sequences rank different numbers of records");
  const std::size_t k = seq.order.size();
  if (k == 0) throw std::invalid_argument("empty sequence");
  const std::vector<std::size_t> r = seq.ranks();
  const std::vector<std::size_t> ro = optimal.ranks();
  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    sum += static_cast<double>(k - r[t] + 1) * static_cast<double>(k - ro[t] + 1);
  }
  const double kk = static_cast<double>(k);
  return sum / (kk * kk * (kk + 1.0) / 2.0);
}

double nrpa(const RankedSequence& seq, const Cycle& cycle) {
  require_same_size(seq, cycle);
  const RankedSequence opt = optimal_sequence(cycle);
  return rpa(seq, opt) / rpa(opt, opt);
}

double first_fail_time(const RankedSequence& seq, const Cycle& cycle) {
  require_same_size(seq, cycle);
  double elapsed = 0.0;
  for (std::size_t p = 0; p < seq.order.size(); ++p) {
    const TestRecord& rec = cycle.records[seq.order[p]];
    elapsed += rec.duration_s;
    if (rec.verdict == Verdict::fail) return elapsed;
  }
  throw DataError("first_fail_time undefined on passing cycles");
}

double ntr(const std::vector<std::pair<double, double>>& first_fail_and_total) {
  if (first_fail_and_total.empty())
    throw DataError("NTR undefined on an empty cycle list");
  double saved = 0.0, total = 0.0;
  for (const auto& [r, r_hat] : first_fail_and_total) {
    // r and r_hat sum the same durations in different orders, so allow the
    // resulting ulp-level drift before rejecting.
    const double slack = 1e-9 * std::max(1.0, std::abs(r_hat));
    if (!(r >= -slack) || !(r <= r_hat + slack))
      throw std::invalid_argument("NTR requires 0 <= r <= r_hat per cycle");
    const double clamped = std::min(std::max(r, 0.0), r_hat);
    saved += r_hat - clamped;
    total += r_hat;
  }
  if (total == 0.0) return 0.0;
  return saved / total;
}

CycleMetrics evaluate_cycle(const RankedSequence& seq, const Cycle& cycle) {
  CycleMetrics out;
  out.nrpa = nrpa(seq, cycle);
  out.total_time = cycle.total_duration();
  if (cycle.has_failure()) {
    out.apfd = apfd(seq, cycle);
    out.rapfd = rapfd(seq, cycle);
    out.first_fail_time = first_fail_time(seq, cycle);
  }
  return out;
}

}  // namespace citcp
