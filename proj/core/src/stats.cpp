#include "citcp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "citcp/errors.hpp"

namespace citcp {

namespace {

void check_matrix(const std::vector<std::vector<double>>& scores) {
  if (scores.size() < 2)
    throw ConfigError("rank comparison needs at least 2 outcome rows");
  const std::size_t k = scores.front().size();
  if (k < 2) throw ConfigError("rank comparison needs at least 2 techniques");
  for (const auto& row : scores)
    if (row.size() != k) throw ConfigError("rank matrix rows have unequal lengths");
}

// P(X <= x) for X ~ Binomial(n, 1/2), exact from a running C(n, i) term.
double binom_half_cdf(int x, int n) {
  double term = std::pow(0.5, n);  // C(n,0)/2^n
  double sum = 0.0;
  for (int i = 0; i <= x; ++i) {
    sum += term;
    term *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return std::min(1.0, sum);
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& scores) {
  const std::size_t k = scores.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // rank 1 = largest score
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ranks(k, 0.0);
  std::size_t i = 0;
  while (i < k) {
    std::size_t j = i;
    while (j + 1 < k && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t p = i; p <= j; ++p) ranks[idx[p]] = avg;
    i = j + 1;
  }
  return ranks;
}

FriedmanResult friedman_iman_davenport(const std::vector<std::vector<double>>& scores) {
  check_matrix(scores);
  const std::size_t n = scores.size();
  const std::size_t k = scores.front().size();

  std::vector<double> mean_ranks(k, 0.0);
  for (const auto& row : scores) {
    const std::vector<double> r = average_ranks(row);
    for (std::size_t j = 0; j < k; ++j) mean_ranks[j] += r[j];
  }
  for (double& m : mean_ranks) m /= static_cast<double>(n);

  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  double sum_sq = 0.0;
  for (double m : mean_ranks) sum_sq += m * m;
  double chi2 = (12.0 * nd / (kd * (kd + 1.0))) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  if (chi2 < 0.0) chi2 = 0.0;  // guards tiny negative round-off

  FriedmanResult out;
  out.chi2_f = chi2;
  out.n_outcomes = n;
  out.n_techniques = k;
  out.mean_ranks = std::move(mean_ranks);
  const double denom = nd * (kd - 1.0) - chi2;
  out.f_id = denom <= 0.0 ? std::numeric_limits<double>::infinity()
                          : (nd - 1.0) * chi2 / denom;
  return out;
}

MeanRankTable mean_rank_table(const std::vector<std::string>& techniques,
                              const std::vector<std::vector<double>>& scores) {
  check_matrix(scores);
  if (techniques.size() != scores.front().size())
    throw ConfigError("technique name count does not match the rank matrix width");
  const FriedmanResult fr = friedman_iman_davenport(scores);

  MeanRankTable table;
  table.entries.reserve(techniques.size());
  for (std::size_t j = 0; j < techniques.size(); ++j)
    table.entries.push_back({techniques[j], fr.mean_ranks[j]});
  std::sort(table.entries.begin(), table.entries.end(),
            [](const MeanRankEntry& a, const MeanRankEntry& b) {
              if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
              return a.technique < b.technique;
            });
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    for (std::size_t j = i + 1; j < table.entries.size(); ++j) {
      table.differences.push_back({table.entries[i].technique, table.entries[j].technique,
                                   table.entries[i].mean_rank - table.entries[j].mean_rank});
    }
  }
  return table;
}

std::vector<SignTestEntry> pairwise_sign_tests(const std::vector<std::string>& techniques,
                                               const std::vector<std::vector<double>>& scores) {
  check_matrix(scores);
  if (techniques.size() != scores.front().size())
    throw ConfigError("technique name count does not match the rank matrix width");
  const std::size_t k = techniques.size();

  std::vector<SignTestEntry> entries;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      SignTestEntry e;
      e.technique_a = techniques[a];
      e.technique_b = techniques[b];
      for (const auto& row : scores) {
        if (row[a] > row[b])
          ++e.wins_a;
        else if (row[b] > row[a])
          ++e.wins_b;
      }
      const int nz = e.wins_a + e.wins_b;
      if (nz == 0) {
        e.p_value = 1.0;
      } else {
        const int lesser = std::min(e.wins_a, e.wins_b);
        e.p_value = std::min(1.0, 2.0 * binom_half_cdf(lesser, nz));
      }
      entries.push_back(std::move(e));
    }
  }

  // Holm step-down: sort ascending by raw p, adjusted(i) = max_{j<=i} (m-j)*p_j.
  std::vector<std::size_t> idx(entries.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return entries[x].p_value < entries[y].p_value;
  });
  const std::size_t m = entries.size();
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double scaled = static_cast<double>(m - i) * entries[idx[i]].p_value;
    running = std::max(running, std::min(1.0, scaled));
    entries[idx[i]].holm_adjusted_p = running;
  }
  return entries;
}

}  // namespace citcp
