#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "npboot/errors.hpp"
#include "npboot/kernel.hpp"
#include "npboot/stats.hpp"

namespace npboot {

/**
 * How the cross-validated bandwidth h_op is split across the three roles
 * a bandwidth plays in the engine:
 *   h_est  - estimation bandwidth for the conditional mean,
 *   g_gen  - bandwidth of the model that generates resampled series,
 *   h_var  - bandwidth for the conditional variance.
 *
 * undersmooth:      h_est = g_gen = h_var = 0.5 * h_op.
 * oversmooth:       h_est = h_var = h_op, g_gen = 2 * h_op.
 * optimal_variance: h_est = g_gen = 0.5 * h_op, h_var = h_op; keeps the
 *                   variance fit at the optimal rate while the mean fit
 *                   is undersmoothed (for heteroscedastic series).
 */
enum class BandwidthStrategy { undersmooth, oversmooth, optimal_variance };

struct Bandwidth {
  double h_est;
  double g_gen;
  double h_var;
  BandwidthStrategy strategy;
};

struct StrategyMultipliers {
  double under = 0.5;
  double over = 2.0;
};

inline Bandwidth apply_strategy(double h_op, BandwidthStrategy strategy,
                                StrategyMultipliers mult = {}) {
  if (h_op <= 0.0) throw std::invalid_argument("h_op must be positive");
  switch (strategy) {
    case BandwidthStrategy::undersmooth:
      return {mult.under * h_op, mult.under * h_op, mult.under * h_op, strategy};
    case BandwidthStrategy::oversmooth:
      return {h_op, mult.over * h_op, h_op, strategy};
    case BandwidthStrategy::optimal_variance:
      return {mult.under * h_op, mult.under * h_op, h_op, strategy};
  }
  throw std::invalid_argument("unknown bandwidth strategy");
}

/**
 * Variance bandwidth of the generating model.  The generator reuses its
 * mean bandwidth except under optimal_variance, where the variance fit
 * stays at the optimal rate everywhere.
 */
inline double generation_h_var(const Bandwidth& bw) {
  return bw.strategy == BandwidthStrategy::optimal_variance ? bw.h_var : bw.g_gen;
}

struct SelectOptions {
  KernelSpec kernel{};
  std::size_t grid_size = 25;
  double grid_lo = 0.1;   // multiples of the pilot bandwidth
  double grid_hi = 10.0;
  std::optional<std::vector<double>> grid_override;
};

struct BandwidthSelection {
  double h_op;
  double pilot;
  std::vector<double> grid;
  std::vector<double> cv;           // mean squared leave-one-out error per candidate
  std::size_t guarded_pairs = 0;    // LOO predictions that fell back to the sample mean
};

/** Rule-of-thumb pilot: 1.06 * sd(series) * T^(-1/5) with T transition pairs. */
inline double pilot_bandwidth(std::span<const double> series) {
  const auto t_pairs = static_cast<double>(series.size() - 1);
  return 1.06 * sample_sd(series) * std::pow(t_pairs, -0.2);
}

namespace detail {

template <class Kernel>
double loocv_error(std::span<const double> pred, std::span<const double> targ, double h,
                   double fallback, std::size_t& guarded) {
  const double inv_h = 1.0 / h;
  const std::size_t n = pred.size();
  double err = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == t) continue;
      const double w = Kernel::eval((pred[t] - pred[j]) * inv_h);
      if (w <= 0.0) continue;
      num += w * targ[j];
      den += w;
    }
    double fit;
    if (den > 0.0) {
      fit = num / den;
    } else {
      fit = fallback;
      ++guarded;
    }
    const double d = targ[t] - fit;
    err += d * d;
  }
  return err / static_cast<double>(n);
}

}  // namespace detail

/**
 * Least-squares leave-one-out cross-validation over a logarithmic grid of
 * bandwidth candidates spanning [grid_lo, grid_hi] times the pilot.  Each
 * pair t is predicted by the fit with pair t deleted; when a candidate
 * leaves a predictor with no in-range neighbours the prediction falls back
 * to the sample mean (counted in guarded_pairs), which keeps the criterion
 * finite and steers the argmin away from degenerate candidates.  Ties pick
 * the smallest candidate.  Fully deterministic.
 */
inline BandwidthSelection select_bandwidth(std::span<const double> series,
                                           const SelectOptions& opts = {}) {
  if (series.size() < 10) throw ShortSeries(series.size(), 10);
  std::span<const double> pred = series.subspan(0, series.size() - 1);
  std::span<const double> targ = series.subspan(1);
  if (sample_sd(pred) <= 0.0) throw DegenerateSample();

  BandwidthSelection out;
  out.pilot = pilot_bandwidth(series);
  if (opts.grid_override) {
    out.grid = *opts.grid_override;
  } else {
    if (opts.grid_size < 1) throw std::invalid_argument("grid_size must be positive");
    const double lo = std::log(opts.grid_lo * out.pilot);
    const double hi = std::log(opts.grid_hi * out.pilot);
    out.grid.resize(opts.grid_size);
    if (opts.grid_size == 1) {
      out.grid[0] = std::exp(0.5 * (lo + hi));
    } else {
      for (std::size_t i = 0; i < opts.grid_size; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(opts.grid_size - 1);
        out.grid[i] = std::exp(lo + f * (hi - lo));
      }
    }
  }
  if (out.grid.empty()) throw std::invalid_argument("empty bandwidth grid");
  for (double h : out.grid)
    if (h <= 0.0) throw std::invalid_argument("bandwidth candidates must be positive");

  const double fallback = mean_of(series);
  out.cv.resize(out.grid.size());
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    switch (opts.kernel.family) {
      case KernelFamily::epanechnikov:
        out.cv[i] = detail::loocv_error<EpanechnikovKernel>(pred, targ, out.grid[i],
                                                            fallback, out.guarded_pairs);
        break;
      case KernelFamily::gaussian:
        out.cv[i] = detail::loocv_error<GaussianKernel>(pred, targ, out.grid[i],
                                                        fallback, out.guarded_pairs);
        break;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.cv.size(); ++i)
    if (out.cv[i] < out.cv[best]) best = i;
  out.h_op = out.grid[best];
  return out;
}

}  // namespace npboot
