#include "citcp/features.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <unordered_map>

#include "citcp/csv.hpp"
#include "citcp/errors.hpp"

namespace citcp {

namespace {

// Per-test history accumulated while sweeping cycles in order.
struct TestHistory {
  std::size_t appearances = 0;
  std::size_t total_fails = 0;
  double duration_sum = 0.0;
  std::int64_t last_timestamp = 0;
  bool seen = false;
  // Recent appearances (cycle_index, verdict), trimmed to the lookback depth.
  std::deque<std::pair<std::size_t, int>> recent;

  double prev_exec_mean() const {
    return appearances == 0 ? 0.0 : duration_sum / static_cast<double>(appearances);
  }

  int verdict_at_offset(std::size_t cycle_index, std::size_t offset) const {
    // offset >= 1; verdict in cycle (cycle_index - offset), 0 when absent.
    if (offset > cycle_index) return 0;
    const std::size_t target = cycle_index - offset;
    for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
      if (it->first == target) return it->second;
      if (it->first < target) break;
    }
    return 0;
  }

  void trim(std::size_t cycle_index, std::size_t depth) {
    while (!recent.empty() && recent.front().first + depth < cycle_index)
      recent.pop_front();
  }
};

using HistoryMap = std::unordered_map<std::string, TestHistory>;

std::vector<double> heuristic_row(const Cycle& cycle, std::size_t cycle_index,
                                  const HistoryMap& hist, const HeuristicWeights& w) {
  double max_prev = 0.0;
  for (const auto& rec : cycle.records) {
    const auto it = hist.find(rec.test_id);
    if (it != hist.end()) max_prev = std::max(max_prev, it->second.prev_exec_mean());
  }
  std::vector<double> out;
  out.reserve(cycle.size());
  for (const auto& rec : cycle.records) {
    const auto it = hist.find(rec.test_id);
    if (it == hist.end()) {
      out.push_back(0.0);
      continue;
    }
    const TestHistory& h = it->second;
    const int v1 = h.verdict_at_offset(cycle_index, 1);
    const int v2 = h.verdict_at_offset(cycle_index, 2);
    const double older_fails =
        static_cast<double>(h.total_fails) - static_cast<double>(v1 + v2);
    const double tail =
        older_fails / std::max(1.0, static_cast<double>(h.appearances) - 2.0);
    const double norm_dur = max_prev > 0.0 ? h.prev_exec_mean() / max_prev : 0.0;
    out.push_back(w.w1 * v1 + w.w2 * v2 + w.w3 * tail - w.duration_penalty * norm_dur);
  }
  return out;
}

void absorb_cycle(const Cycle& cycle, std::size_t cycle_index, HistoryMap& hist,
                  std::size_t lookback) {
  for (const auto& rec : cycle.records) {
    TestHistory& h = hist[rec.test_id];
    h.appearances += 1;
    h.total_fails += static_cast<std::size_t>(verdict_value(rec.verdict));
    h.duration_sum += rec.duration_s;
    h.last_timestamp = cycle.commit_timestamp;
    h.seen = true;
    h.recent.emplace_back(cycle_index, verdict_value(rec.verdict));
    h.trim(cycle_index + 1, lookback);
  }
}

}  // namespace

FeatureFamily feature_family_from_string(const std::string& s) {
  if (s == "bertolino-rl-family") return FeatureFamily::bertolino_rl_family;
  if (s == "deeporder") return FeatureFamily::deeporder;
  if (s == "coleman") return FeatureFamily::coleman;
  throw ConfigError("unknown feature family '" + s +
                    "' (expected bertolino-rl-family, deeporder, or coleman)");
}

std::string to_string(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::bertolino_rl_family: return "bertolino-rl-family";
    case FeatureFamily::deeporder: return "deeporder";
    case FeatureFamily::coleman: return "coleman";
  }
  return "bertolino-rl-family";
}

FeatureSchema FeatureSchema::for_family(FeatureFamily family) {
  FeatureSchema s;
  s.family = family;
  // DeepOrder's published inputs are history-derived plus its heuristic
  // label; code-characteristic columns stay out of that family.
  s.include_extra_columns = family != FeatureFamily::deeporder;
  return s;
}

FeatureMatrix build_features(const Subject& subject, const FeatureSchema& schema) {
  if (schema.history_window < 1)
    throw ConfigError("feature history window must be >= 1");

  std::vector<std::size_t> extra_idx;
  if (schema.include_extra_columns) {
    if (schema.extra_columns.empty()) {
      extra_idx.resize(subject.feature_names.size());
      for (std::size_t i = 0; i < extra_idx.size(); ++i) extra_idx[i] = i;
    } else {
      for (const auto& name : schema.extra_columns) {
        const auto it = std::find(subject.feature_names.begin(),
                                  subject.feature_names.end(), name);
        if (it == subject.feature_names.end())
          throw ConfigError("subject '" + subject.name + "' has no feature column '" +
                            name + "'");
        extra_idx.push_back(
            static_cast<std::size_t>(it - subject.feature_names.begin()));
      }
    }
  }
  const bool with_heuristic = schema.family == FeatureFamily::deeporder;
  const std::size_t w = static_cast<std::size_t>(schema.history_window);

  FeatureMatrix out;
  for (std::size_t j = 1; j <= w; ++j)
    out.component_names.push_back("failure_history_" + std::to_string(j));
  out.component_names.push_back("time_since_last_exec");
  out.component_names.push_back("prev_exec_time");
  if (with_heuristic) out.component_names.push_back("heuristic_priority");
  for (std::size_t i : extra_idx)
    out.component_names.push_back(subject.feature_names[i]);

  const std::size_t lookback = std::max<std::size_t>(w, 2);
  HistoryMap hist;
  out.values.resize(subject.cycles.size());
  for (std::size_t c = 0; c < subject.cycles.size(); ++c) {
    const Cycle& cycle = subject.cycles[c];
    std::vector<double> heur;
    if (with_heuristic) heur = heuristic_row(cycle, c, hist, HeuristicWeights{});
    auto& rows = out.values[c];
    rows.reserve(cycle.size());
    for (std::size_t r = 0; r < cycle.records.size(); ++r) {
      const TestRecord& rec = cycle.records[r];
      std::vector<double> row;
      row.reserve(out.width());
      const auto it = hist.find(rec.test_id);
      const TestHistory* h = it == hist.end() ? nullptr : &it->second;
      for (std::size_t j = 1; j <= w; ++j)
        row.push_back(h == nullptr ? 0.0 : static_cast<double>(h->verdict_at_offset(c, j)));
      row.push_back(h == nullptr || !h->seen
                        ? 0.0
                        : static_cast<double>(cycle.commit_timestamp - h->last_timestamp));
      row.push_back(h == nullptr ? 0.0 : h->prev_exec_mean());
      if (with_heuristic) row.push_back(heur[r]);
      for (std::size_t i : extra_idx) {
        if (i >= rec.features.size())
          throw ConfigError("record '" + rec.test_id +
                            "' is missing extra feature columns");
        row.push_back(rec.features[i]);
      }
      rows.push_back(std::move(row));
    }
    absorb_cycle(cycle, c, hist, lookback);
  }
  return out;
}

std::vector<std::vector<double>> heuristic_priority(const Subject& subject,
                                                    const HeuristicWeights& weights) {
  if (weights.w1 < 0 || weights.w2 < 0 || weights.w3 < 0)
    throw ConfigError("heuristic priority weights must be nonnegative");
  std::vector<std::vector<double>> out(subject.cycles.size());
  HistoryMap hist;
  for (std::size_t c = 0; c < subject.cycles.size(); ++c) {
    out[c] = heuristic_row(subject.cycles[c], c, hist, weights);
    absorb_cycle(subject.cycles[c], c, hist, 2);
  }
  return out;
}

void write_feature_dump(const Subject& subject, const FeatureMatrix& matrix,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  out << "cycle_id,commit_timestamp,test_id,duration_s,verdict";
  for (const auto& name : matrix.component_names) out << ',' << name;
  out << '\n';
  for (std::size_t c = 0; c < subject.cycles.size(); ++c) {
    const Cycle& cycle = subject.cycles[c];
    for (std::size_t r = 0; r < cycle.records.size(); ++r) {
      const TestRecord& rec = cycle.records[r];
      out << cycle.cycle_id << ',' << cycle.commit_timestamp << ',' << rec.test_id << ','
          << format_double(rec.duration_s) << ',' << verdict_value(rec.verdict);
      for (double v : matrix.values[c][r]) out << ',' << format_double(v);
      out << '\n';
    }
  }
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace citcp
