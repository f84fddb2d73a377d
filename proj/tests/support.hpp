#pragma once

// Helpers shared by the unit suite and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace test_support {

/** Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|. */
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

inline double frequency_of(std::span<const double> values, double atom,
                           double tol = 1e-9) {
  std::size_t hits = 0;
  for (double v : values)
    if (std::fabs(v - atom) <= tol) ++hits;
  return static_cast<double>(hits) / static_cast<double>(values.size());
}

}  // namespace test_support
