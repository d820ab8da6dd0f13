#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "citcp/subject.hpp"

namespace citcp {

// Per-cycle evaluation of one schedule. apfd/rapfd/first_fail_time are
// meaningful only when the cycle has at least one failure; they are NaN
// otherwise. nrpa and total_time are defined for every cycle.
struct CycleMetrics {
  double apfd = std::numeric_limits<double>::quiet_NaN();
  double rapfd = std::numeric_limits<double>::quiet_NaN();
  double nrpa = std::numeric_limits<double>::quiet_NaN();
  double first_fail_time = std::numeric_limits<double>::quiet_NaN();  // r
  double total_time = 0.0;                                            // r_hat
};

// Weighted mean position of fault detection, 1-based ranks:
//   1 - sum(rank of failing tests) / (k*m) + 1/(2k).
// Throws DataError when the cycle has no failures.
double apfd(const RankedSequence& seq, const Cycle& cycle);

// Attainable extremes for a cycle with m failures out of k tests:
// (m/(2k), 1 - m/(2k)). Throws when m = 0.
std::pair<double, double> apfd_bounds(const Cycle& cycle);

// Min-max rectified APFD in [0, 1]. When every test fails, every order is
// optimal and the value is defined as 1.
double rapfd(const RankedSequence& seq, const Cycle& cycle);

// Rank-proximity of `seq` to `optimal`, both over the same k records:
//   RPA(s) = sum_t (k - rank(s,t) + 1) * (k - rank(opt,t) + 1) / (k^2 (k+1)/2).
double rpa(const RankedSequence& seq, const RankedSequence& optimal);

// RPA of the schedule normalized by RPA of the cycle's reference ordering
// (failing first, then ascending duration). 1 iff the ranking matches it.
double nrpa(const RankedSequence& seq, const Cycle& cycle);

// Cumulative scheduled time up to and including the first failing test.
// Throws when the cycle has no failures.
double first_fail_time(const RankedSequence& seq, const Cycle& cycle);

// Aggregate time-reduction ratio over failing cycles, given per-cycle pairs
// (r, r_hat): sum(r_hat - r) / sum(r_hat). Sums first, then divides; this is
// not the mean of per-cycle ratios. Throws on an empty list.
double ntr(const std::vector<std::pair<double, double>>& first_fail_and_total);

CycleMetrics evaluate_cycle(const RankedSequence& seq, const Cycle& cycle);

}  // namespace citcp
