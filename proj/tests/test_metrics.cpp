#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "citcp/errors.hpp"
#include "citcp/metrics.hpp"
#include "citcp/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace citcp;
using testutil::cycle_of;
using testutil::seq_of;

namespace {

// Independent reference: area under the step curve of faults found after i
// executed tests, trapezoidal rule over i = 0..n, normalized by n*m.
double apfd_step_oracle(const RankedSequence& seq, const Cycle& cycle) {
  const std::size_t n = cycle.size();
  std::size_t m = 0;
  for (const auto& r : cycle.records) m += r.verdict == Verdict::fail ? 1 : 0;
  std::vector<double> found(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    found[i] = found[i - 1] +
               (cycle.records[seq.order[i - 1]].verdict == Verdict::fail ? 1.0 : 0.0);
  }
  double area = 0.0;
  for (std::size_t i = 1; i <= n; ++i) area += 0.5 * (found[i - 1] + found[i]);
  return area / (static_cast<double>(n) * static_cast<double>(m));
}

// Independent reference: the rank-proximity sum written as a literal double
// loop, one inner term per position from the scheduled rank to the end.
double rpa_literal_oracle(const RankedSequence& seq, const RankedSequence& optimal) {
  const std::size_t k = seq.order.size();
  const auto sr = seq.ranks();
  const auto orr = optimal.ranks();
  double total = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t i = sr[t]; i <= k; ++i) {
      total += static_cast<double>(k - orr[t] + 1);
    }
  }
  const double kd = static_cast<double>(k);
  return total / (kd * kd * (kd + 1.0) / 2.0);
}

Cycle random_cycle(Rng& rng, std::size_t k, std::size_t m) {
  std::string verdicts(k, '0');
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  for (std::size_t i = 0; i < m; ++i) verdicts[idx[i]] = '1';
  std::vector<double> durations(k);
  for (auto& d : durations) d = rng.uniform(0.1, 20.0);
  return cycle_of(1, 0, verdicts, durations);
}

RankedSequence random_sequence(Rng& rng, std::size_t k) {
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  return seq_of(order);
}

}  // namespace

TEST_CASE("apfd matches hand values") {
  // 5 tests, single failure executed third.
  auto c = cycle_of(1, 0, "00100");
  auto s = seq_of({0, 1, 2, 3, 4});
  CHECK(apfd(s, c) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rapfd(s, c) == doctest::Approx(0.5).epsilon(1e-12));

  // 10 tests, both failures first.
  auto c2 = cycle_of(2, 0, "1100000000");
  auto s2 = seq_of({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(apfd(s2, c2) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("apfd equals the step-curve area on random cycles") {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.below(29);
    const std::size_t m = 1 + rng.below(k);
    auto cycle = random_cycle(rng, k, m);
    auto seq = random_sequence(rng, k);
    CHECK(apfd(seq, cycle) ==
          doctest::Approx(apfd_step_oracle(seq, cycle)).epsilon(1e-9));
  }
}

TEST_CASE("apfd requires a failing test") {
  auto c = cycle_of(1, 0, "000");
  CHECK_THROWS_AS(apfd(seq_of({0, 1, 2}), c), DataError);
  CHECK_THROWS_AS(apfd_bounds(c), DataError);
  CHECK_THROWS_AS(first_fail_time(seq_of({0, 1, 2}), c), DataError);
}

TEST_CASE("apfd bounds bracket every permutation and are attained") {
  Rng rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.below(9);
    const std::size_t m = 1 + rng.below(k - 1);
    auto cycle = random_cycle(rng, k, m);
    const auto [lo, hi] = apfd_bounds(cycle);
    CHECK(lo == doctest::Approx(m / (2.0 * k)).epsilon(1e-12));
    CHECK(hi == doctest::Approx(1.0 - m / (2.0 * k)).epsilon(1e-12));

    double seen_lo = 1.0, seen_hi = 0.0;
    for (int p = 0; p < 200; ++p) {
      auto seq = random_sequence(rng, k);
      const double a = apfd(seq, cycle);
      seen_lo = std::min(seen_lo, a);
      seen_hi = std::max(seen_hi, a);
      CHECK(a >= lo - 1e-9);
      CHECK(a <= hi + 1e-9);
      // Rectified value reproduces the raw one.
      CHECK(lo + rapfd(seq, cycle) * (hi - lo) == doctest::Approx(a).epsilon(1e-9));
    }

    // Failing-first / failing-last schedules hit the exact extremes.
    std::vector<std::size_t> first, last;
    for (std::size_t i = 0; i < k; ++i)
      (cycle.records[i].verdict == Verdict::fail ? first : last).push_back(i);
    std::vector<std::size_t> best = first, worst = last;
    best.insert(best.end(), last.begin(), last.end());
    worst.insert(worst.end(), first.begin(), first.end());
    CHECK(apfd(seq_of(best), cycle) == doctest::Approx(hi).epsilon(1e-12));
    CHECK(apfd(seq_of(worst), cycle) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(rapfd(seq_of(best), cycle) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rapfd(seq_of(worst), cycle) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("rapfd is 1 when every test fails") {
  auto c = cycle_of(1, 0, "1111");
  Rng rng(7);
  for (int p = 0; p < 10; ++p) {
    CHECK(rapfd(random_sequence(rng, 4), c) == doctest::Approx(1.0));
  }
}

TEST_CASE("moving a failing test one slot earlier strictly raises apfd") {
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 3 + rng.below(10);
    const std::size_t m = 1 + rng.below(k - 1);
    auto cycle = random_cycle(rng, k, m);
    auto seq = random_sequence(rng, k);
    // Find a position p where a passing test directly precedes a failing one.
    for (std::size_t p = 0; p + 1 < k; ++p) {
      const bool a_fail = cycle.records[seq.order[p]].verdict == Verdict::fail;
      const bool b_fail = cycle.records[seq.order[p + 1]].verdict == Verdict::fail;
      if (!a_fail && b_fail) {
        auto swapped = seq.order;
        std::swap(swapped[p], swapped[p + 1]);
        CHECK(apfd(seq_of(swapped), cycle) > apfd(seq, cycle));
        break;
      }
    }
  }
}

TEST_CASE("apfd ignores durations") {
  auto base = cycle_of(1, 0, "0101", {1, 1, 1, 1});
  auto scaled = cycle_of(1, 0, "0101", {9, 2, 30, 0.5});
  auto s = seq_of({2, 0, 3, 1});
  CHECK(apfd(s, base) == apfd(s, scaled));
}

TEST_CASE("rpa closed form equals the literal double sum exhaustively") {
  for (std::size_t k = 1; k <= 6; ++k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const auto optimal = seq_of(perm);
    do {
      auto seq = seq_of(perm);
      CHECK(rpa(seq, optimal) ==
            doctest::Approx(rpa_literal_oracle(seq, optimal)).epsilon(1e-12));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  // Also against a non-identity reference.
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(10);
    auto seq = random_sequence(rng, k);
    auto opt = random_sequence(rng, k);
    CHECK(rpa(seq, opt) == doctest::Approx(rpa_literal_oracle(seq, opt)).epsilon(1e-12));
  }
}

TEST_CASE("rpa is invariant under consistent relabeling of records") {
  Rng rng(505);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.below(8);
    auto seq = random_sequence(rng, k);
    auto opt = random_sequence(rng, k);
    std::vector<std::size_t> relabel(k);
    std::iota(relabel.begin(), relabel.end(), std::size_t{0});
    rng.shuffle(relabel);
    auto remap = [&](const RankedSequence& s) {
      std::vector<std::size_t> order(k);
      for (std::size_t p = 0; p < k; ++p) order[p] = relabel[s.order[p]];
      return seq_of(order);
    };
    CHECK(rpa(remap(seq), remap(opt)) == doctest::Approx(rpa(seq, opt)).epsilon(1e-12));
  }
}

TEST_CASE("nrpa matches the five-test worked example") {
  // All failing, ascending durations: the reference ordering is the record
  // order itself, so priorities 5..1 reproduce it exactly.
  auto c = cycle_of(1, 0, "11111", {1, 2, 3, 4, 5});
  auto opt = RankedSequence::from_scores({5, 4, 3, 2, 1});
  CHECK(opt.order == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(nrpa(opt, c) == doctest::Approx(1.0).epsilon(1e-12));

  auto scheduled = RankedSequence::from_scores({5, 2, 3, 4, 1});
  CHECK(scheduled.order == std::vector<std::size_t>{0, 3, 2, 1, 4});
  CHECK(nrpa(scheduled, c) == doctest::Approx(51.0 / 55.0).epsilon(1e-12));
  CHECK(nrpa(scheduled, c) == doctest::Approx(0.9273).epsilon(1e-3));

  auto reversed = seq_of({4, 3, 2, 1, 0});
  CHECK(nrpa(reversed, c) == doctest::Approx(35.0 / 55.0).epsilon(1e-12));
}

TEST_CASE("nrpa is defined for all-passing cycles and tops out at 1") {
  auto c = cycle_of(1, 0, "000", {3, 1, 2});
  // Reference ordering: ascending duration -> records 1, 2, 0.
  CHECK(nrpa(seq_of({1, 2, 0}), c) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nrpa(seq_of({0, 1, 2}), c) < 1.0);
  Rng rng(606);
  for (int p = 0; p < 50; ++p) {
    auto s = random_sequence(rng, 3);
    CHECK(nrpa(s, c) <= 1.0 + 1e-12);
    CHECK(nrpa(s, c) > 0.0);
  }
}

TEST_CASE("first_fail_time accumulates durations through the first failure") {
  auto c = cycle_of(1, 0, "100", {2, 3, 5});
  CHECK(first_fail_time(seq_of({0, 1, 2}), c) == doctest::Approx(2.0));
  CHECK(first_fail_time(seq_of({1, 2, 0}), c) == doctest::Approx(10.0));
  CHECK(first_fail_time(seq_of({1, 0, 2}), c) == doctest::Approx(5.0));
}

TEST_CASE("ntr sums before dividing") {
  CHECK(ntr({{2.0, 10.0}}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(ntr({{2.0, 10.0}, {5.0, 10.0}}) == doctest::Approx(0.65).epsilon(1e-12));
  // Mean of the per-cycle ratios would be (0.8 + 0.5) / 2 = 0.65 here too, so
  // use an asymmetric pair that distinguishes the two definitions.
  CHECK(ntr({{1.0, 2.0}, {10.0, 100.0}}) == doctest::Approx(91.0 / 102.0).epsilon(1e-12));
  CHECK_THROWS_AS(ntr({}), DataError);
}

TEST_CASE("evaluate_cycle fills every field consistently") {
  auto c = cycle_of(1, 0, "010", {2, 3, 5});
  auto s = seq_of({2, 1, 0});
  auto m = evaluate_cycle(s, c);
  CHECK(m.apfd == doctest::Approx(apfd(s, c)));
  CHECK(m.rapfd == doctest::Approx(rapfd(s, c)));
  CHECK(m.nrpa == doctest::Approx(nrpa(s, c)));
  CHECK(m.first_fail_time == doctest::Approx(8.0));
  CHECK(m.total_time == doctest::Approx(10.0));

  auto all_pass = cycle_of(2, 0, "000", {2, 3, 5});
  auto mp = evaluate_cycle(s, all_pass);
  CHECK(std::isnan(mp.apfd));
  CHECK(std::isnan(mp.rapfd));
  CHECK(std::isnan(mp.first_fail_time));
  CHECK(!std::isnan(mp.nrpa));
  CHECK(mp.total_time == doctest::Approx(10.0));
}
