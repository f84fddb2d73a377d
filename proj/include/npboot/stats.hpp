#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "npboot/errors.hpp"

namespace npboot {

inline double mean_of(std::span<const double> v) {
  if (v.empty()) throw EmptySample();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/** Sample standard deviation (n-1 divisor); 0 for fewer than two values. */
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/** Median with the usual midpoint convention for even lengths. */
inline double median_of(std::span<const double> v) {
  if (v.empty()) throw EmptySample();
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  if (n % 2 == 1) return s[n / 2];
  return 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

/**
 * Order-statistic quantile: value at rank ceil(n*beta), 1-based, with no
 * interpolation.  A tiny slack keeps exact rational ranks (e.g. 100*0.05)
 * stable against floating-point representation of beta.  Rank is clamped
 * to [1, n], so beta near 0 or 1 returns the extreme order statistics.
 */
inline double rank_quantile(std::span<const double> sorted_ascending, double beta) {
  if (sorted_ascending.empty()) throw EmptySample();
  const auto n = static_cast<double>(sorted_ascending.size());
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(n * beta - 1e-9));
  rank = std::clamp<std::ptrdiff_t>(rank, 1,
                                    static_cast<std::ptrdiff_t>(sorted_ascending.size()));
  return sorted_ascending[static_cast<std::size_t>(rank - 1)];
}

}  // namespace npboot
