#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "citcp/subject.hpp"

namespace citcp {

// Feature families mirror the input sets the implemented technique lineages
// consume. All are assembled from execution history only; nothing from the
// current cycle's outcomes leaks in.
enum class FeatureFamily { bertolino_rl_family, deeporder, coleman };

FeatureFamily feature_family_from_string(const std::string& s);  // ConfigError on unknown
std::string to_string(FeatureFamily f);

struct FeatureSchema {
  FeatureFamily family = FeatureFamily::bertolino_rl_family;
  int history_window = 4;  // W most recent cycles of verdict history
  bool include_extra_columns = true;
  // Specific extra columns to pass through; empty means all the subject has.
  std::vector<std::string> extra_columns;

  static FeatureSchema for_family(FeatureFamily family);
};

// values[cycle][record] is one vector aligned with component_names.
struct FeatureMatrix {
  std::vector<std::string> component_names;
  std::vector<std::vector<std::vector<double>>> values;

  std::size_t width() const { return component_names.size(); }
};

// Components per (cycle, test), all derived from cycles strictly before the
// current one:
//   failure_history_1..W  verdict in cycle c-1..c-W (0 if absent there)
//   time_since_last_exec  seconds since the previous appearance (0 if first)
//   prev_exec_time        mean duration over past appearances (0 if first)
//   heuristic_priority    (deeporder family) see heuristic_priority below
// plus pass-through extra columns. Throws ConfigError when a requested extra
// column does not exist.
FeatureMatrix build_features(const Subject& subject, const FeatureSchema& schema);

// Recency-decayed failure score minus a duration penalty:
//   w1*v(c-1) + w2*v(c-2) + w3*sum_{j>=3} v(c-j) / max(1, appearances-2)
//     - duration_penalty * prev_exec_time / (cycle max of prev_exec_time)
// v(c-j) is the verdict in cycle c-j (0 when the test was absent);
// appearances counts past appearances. Higher = schedule earlier.
struct HeuristicWeights {
  double w1 = 0.7;
  double w2 = 0.2;
  double w3 = 0.1;
  double duration_penalty = 0.5;
};

std::vector<std::vector<double>> heuristic_priority(const Subject& subject,
                                                    const HeuristicWeights& weights = {});

// Debug dump: ingestion columns followed by the feature components.
void write_feature_dump(const Subject& subject, const FeatureMatrix& matrix,
                        const std::string& path);

}  // namespace citcp
