#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citcp/subject.hpp"

namespace citcp::testutil {

// Builds a cycle from a verdict string ('1' = fail), ids t0, t1, ...
// Durations default to 1 s each.
inline Cycle cycle_of(std::int64_t id, std::int64_t ts, const std::string& verdicts,
                      std::vector<double> durations = {}) {
  Cycle c;
  c.cycle_id = id;
  c.commit_timestamp = ts;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    TestRecord r;
    r.test_id = "t" + std::to_string(i);
    r.duration_s = i < durations.size() ? durations[i] : 1.0;
    r.verdict = verdicts[i] == '1' ? Verdict::fail : Verdict::pass;
    c.records.push_back(std::move(r));
  }
  return c;
}

// A sequence whose schedule is exactly `order` (record order[p] runs at p).
inline RankedSequence seq_of(const std::vector<std::size_t>& order) {
  std::vector<double> scores(order.size(), 0.0);
  for (std::size_t p = 0; p < order.size(); ++p)
    scores[order[p]] = static_cast<double>(order.size() - p);
  return RankedSequence::from_scores(std::move(scores));
}

}  // namespace citcp::testutil
