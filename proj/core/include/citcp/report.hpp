#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "citcp/harness.hpp"
#include "citcp/stats.hpp"

namespace citcp {

// CSV round-trip for run outputs. Doubles print with format_double; NaN
// becomes an empty field and reads back as NaN.
void write_per_cycle_csv(const std::vector<CycleRow>& rows, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
void write_applicability_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

std::vector<CycleRow> read_per_cycle_csv(std::istream& in, const std::string& src);
std::vector<SummaryRow> read_summary_csv(std::istream& in, const std::string& src);

std::vector<CycleRow> read_per_cycle_file(const std::string& path);
std::vector<SummaryRow> read_summary_file(const std::string& path);

// rAPFD outcomes pivoted for rank statistics: one block per failing test
// cycle that every technique scored.
struct OutcomeMatrix {
  std::vector<std::string> techniques;
  std::vector<std::vector<double>> scores;  // [block][technique]
};

OutcomeMatrix failing_cycle_matrix(const std::vector<CycleRow>& rows);

// Friedman + Iman-Davenport, mean ranks with pairwise differences, and
// Holm-adjusted sign tests. Throws ConfigError when the matrix has fewer
// than 2 techniques or 2 blocks.
std::string friedman_report(const OutcomeMatrix& m);

// Aligned-text renderings.
std::string summary_table(const std::vector<SummaryRow>& rows);
std::string applicability_table(const std::vector<SummaryRow>& rows);

// Mean-rAPFD and NTR grids split by subject failure-rate class, one section
// per protocol, plus rank statistics and per-technique protocol deltas.
std::string compare_report(const std::vector<CycleRow>& rows,
                           const std::vector<SummaryRow>& summaries);

// per_cycle.csv, summary.csv, friedman.txt, applicability.csv under out_dir
// (created if missing). A rank-degenerate run writes the reason into
// friedman.txt instead of failing.
void write_run_outputs(const RunResult& result, const std::string& out_dir);

}  // namespace citcp
