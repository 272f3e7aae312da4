#pragma once

#include <span>

namespace tmaze {

/// Combined sample sizes up to this use the exact permutation distribution.
inline constexpr int kExactRankSumLimit = 50;

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value. Midranks for ties.
/// Exact permutation distribution of the rank sum when n + m <= 50, otherwise
/// the normal approximation with tie and continuity correction.
/// Throws Error(kDegenerate) when every value is identical.
double rank_sum_test(std::span<const double> a, std::span<const double> b);
double rank_sum_test_exact(std::span<const double> a, std::span<const double> b);
double rank_sum_test_normal(std::span<const double> a, std::span<const double> b);

/// Mann-Whitney U of `a` (pairs a > b plus half the ties).
double mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// One-sample two-sided t-test of the 0/1 correctness indicators against
/// `chance`. Throws Error(kDegenerate) when all indicators agree.
double t_test_vs_chance(int correct, int total, double chance);

struct MeanCi {
  double mean = 0.0;
  double sd = 0.0;
  double half_width = 0.0;  // 1.96 sd / sqrt(n)
  int n = 0;
};
MeanCi mean_ci(std::span<const double> values);

}  // namespace tmaze
