#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace citcp {

// Column-wise comparison of k techniques over N paired outcomes (rows).
// Scores are "higher is better"; within each row the best score gets rank 1,
// ties receive average ranks.

struct FriedmanResult {
  double chi2_f = 0.0;
  double f_id = 0.0;  // +infinity under perfect agreement
  std::size_t n_outcomes = 0;
  std::size_t n_techniques = 0;
  std::vector<double> mean_ranks;  // per input column
};

// Throws ConfigError when N < 2, k < 2, or rows are ragged.
FriedmanResult friedman_iman_davenport(const std::vector<std::vector<double>>& scores);

// Average ranks per row of one score vector; ranks are 1-based, ties averaged.
std::vector<double> average_ranks(const std::vector<double>& scores);

struct MeanRankEntry {
  std::string technique;
  double mean_rank = 0.0;
};

struct MeanRankDifference {
  std::string technique_a;
  std::string technique_b;
  double rank_difference = 0.0;  // mean_rank(a) - mean_rank(b), a before b
};

struct MeanRankTable {
  std::vector<MeanRankEntry> entries;             // ascending mean rank, ties by name
  std::vector<MeanRankDifference> differences;    // all unordered pairs in entry order
};

MeanRankTable mean_rank_table(const std::vector<std::string>& techniques,
                              const std::vector<std::vector<double>>& scores);

// Exact two-sided sign test per technique pair (ties dropped), with Holm
// step-down adjustment across all pairs.
struct SignTestEntry {
  std::string technique_a;
  std::string technique_b;
  int wins_a = 0;
  int wins_b = 0;
  double p_value = 1.0;
  double holm_adjusted_p = 1.0;
};

std::vector<SignTestEntry> pairwise_sign_tests(const std::vector<std::string>& techniques,
                                               const std::vector<std::vector<double>>& scores);

}  // namespace citcp
