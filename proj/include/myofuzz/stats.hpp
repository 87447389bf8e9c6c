#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace myofuzz::stats {

struct WilcoxonResult {
  double p = 1.0;          // two-sided
  std::size_t n = 0;       // non-zero differences
  double w_plus = 0.0;     // rank sum of positive differences a - b
  double w_minus = 0.0;
  bool exact = true;
};

// Paired signed-rank test on a - b. Zero differences are dropped and tied
// magnitudes get averaged ranks. Up to kExactLimit pairs the p-value is the
// exact permutation probability of the observed rank set; above it a normal
// approximation with tie-corrected variance is used (no continuity term).
inline constexpr std::size_t kExactLimit = 20;
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// Holm step-down adjustment, returned in input order.
std::vector<double> holm_adjust(std::span<const double> p);

// Ranks within one case, best (largest score) = 1, ties averaged.
std::vector<double> rank_descending(std::span<const double> scores);

// scores[method][case]; returns the mean rank of each method over cases.
std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores);

}  // namespace myofuzz::stats
