#include "tmaze/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tmaze/error.hpp"

namespace tmaze {

namespace {

void require_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kDegenerate, "rank-sum test needs two non-empty samples");
  double first = a.front();
  bool all_same = std::all_of(a.begin(), a.end(), [first](double v) { return v == first; }) &&
                  std::all_of(b.begin(), b.end(), [first](double v) { return v == first; });
  if (all_same) throw Error(ErrorCode::kDegenerate, "rank-sum test on samples with a single common value");
}

/// Midranks of the pooled sample, doubled so they stay integral.
std::vector<int> doubled_midranks(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<int> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return pooled[static_cast<std::size_t>(x)] < pooled[static_cast<std::size_t>(y)]; });
  std::vector<int> ranks(pooled.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           pooled[static_cast<std::size_t>(order[j + 1])] == pooled[static_cast<std::size_t>(order[i])])
      ++j;
    // positions i..j (0-based) share rank ((i+1)+(j+1))/2; doubled: i+j+2
    for (std::size_t k = i; k <= j; ++k) ranks[static_cast<std::size_t>(order[k])] = static_cast<int>(i + j + 2);
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

double rank_sum_test_exact(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  const int n = static_cast<int>(a.size());
  const int total = static_cast<int>(a.size() + b.size());
  auto ranks = doubled_midranks(a, b);
  int observed = 0;
  for (int k = 0; k < n; ++k) observed += ranks[static_cast<std::size_t>(k)];
  const int max_sum = std::accumulate(ranks.begin(), ranks.end(), 0);

  // ways[c][s]: subsets of size c with doubled rank sum s.
  std::vector<std::vector<double>> ways(static_cast<std::size_t>(n + 1),
                                        std::vector<double>(static_cast<std::size_t>(max_sum + 1), 0.0));
  ways[0][0] = 1.0;
  for (int item = 0; item < total; ++item) {
    const int r = ranks[static_cast<std::size_t>(item)];
    for (int c = std::min(item + 1, n); c >= 1; --c) {
      auto& dst = ways[static_cast<std::size_t>(c)];
      const auto& src = ways[static_cast<std::size_t>(c - 1)];
      for (int s = max_sum; s >= r; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r)];
    }
  }
  const auto& dist = ways[static_cast<std::size_t>(n)];
  const double count = std::accumulate(dist.begin(), dist.end(), 0.0);
  // The expected doubled rank sum is n (N + 1).
  const long long centre = static_cast<long long>(n) * (total + 1);
  const long long dev_obs = std::llabs(observed - centre);
  double extreme = 0.0;
  for (int s = 0; s <= max_sum; ++s)
    if (std::llabs(s - centre) >= dev_obs) extreme += dist[static_cast<std::size_t>(s)];
  return std::min(1.0, extreme / count);
}

double rank_sum_test_normal(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double total = n + m;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double u = mann_whitney_u(a, b);
  const double mean = n * m / 2.0;
  const double var = n * m / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
  if (!(var > 0.0)) throw Error(ErrorCode::kDegenerate, "rank-sum variance is zero");
  const double z = std::max(0.0, std::fabs(u - mean) - 0.5) / std::sqrt(var);
  boost::math::normal_distribution<double> norm;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(norm, z)));
}

double rank_sum_test(std::span<const double> a, std::span<const double> b) {
  if (static_cast<int>(a.size() + b.size()) <= kExactRankSumLimit) return rank_sum_test_exact(a, b);
  return rank_sum_test_normal(a, b);
}

double t_test_vs_chance(int correct, int total, double chance) {
  if (total < 2) throw Error(ErrorCode::kDegenerate, "t-test needs at least two observations");
  if (correct < 0 || correct > total) throw Error(ErrorCode::kDegenerate, "correct count outside [0, total]");
  if (correct == 0 || correct == total)
    throw Error(ErrorCode::kDegenerate, "all " + std::to_string(total) + " indicators are identical");
  const double n = total;
  const double p = correct / n;
  const double sd = std::sqrt(n / (n - 1.0) * p * (1.0 - p));
  const double t = (p - chance) / (sd / std::sqrt(n));
  boost::math::students_t_distribution<double> dist(n - 1.0);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

MeanCi mean_ci(std::span<const double> values) {
  MeanCi out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / out.n;
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (out.n - 1));
    out.half_width = 1.96 * out.sd / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

}  // namespace tmaze
