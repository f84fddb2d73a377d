#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "npboot/errors.hpp"
#include "npboot/kernel.hpp"
#include "npboot/stats.hpp"

namespace npboot {

/**
 * Clamp box for the fitted conditional mean and scale.  The mean estimate
 * is clamped into [-mean_cap, mean_cap]; the scale estimate (standard
 * deviation units) into [sd_floor, sd_cap].  Keeping the recursion inside
 * a fixed box is what stops resampled trajectories from diverging when a
 * path wanders into a region with little data.
 */
struct TruncationBounds {
  double mean_cap;
  double sd_floor;
  double sd_cap;
};

inline double truncate_mean(double v, const TruncationBounds& b) {
  return std::clamp(v, -b.mean_cap, b.mean_cap);
}

inline double truncate_sd(double v, const TruncationBounds& b) {
  return std::clamp(v, b.sd_floor, b.sd_cap);
}

enum class World { real, bootstrap };

/**
 * Data-driven defaults.  Real world: mean_cap = 5 * max|x|, sd_cap =
 * 2 * sd(x), floor 0.01.  Bootstrap world caps against the real-world box
 * so resampled series cannot talk themselves into ever-wider bounds:
 * mean_cap* = min(2 * mean_cap, 5 * max|x*|) and sd_cap* =
 * min(2 * sd_cap, 2 * sd(x*)).  A degenerate sample (sd = 0) collapses
 * sd_cap onto the floor, and an all-zero sample gets a unit mean_cap so
 * the box never has zero width.
 */
inline TruncationBounds default_bounds(std::span<const double> sample, World world,
                                       const TruncationBounds* real_bounds = nullptr,
                                       double sd_floor = 0.01) {
  if (sample.empty()) throw EmptySample();
  double mean_cap = 5.0 * max_abs(sample);
  double sd_cap = 2.0 * sample_sd(sample);
  if (world == World::bootstrap) {
    if (real_bounds == nullptr)
      throw std::invalid_argument("bootstrap bounds need the real-world bounds");
    mean_cap = std::min(2.0 * real_bounds->mean_cap, mean_cap);
    sd_cap = std::min(2.0 * real_bounds->sd_cap, sd_cap);
  }
  if (mean_cap <= 0.0) mean_cap = 1.0;
  sd_cap = std::max(sd_cap, sd_floor);
  return TruncationBounds{mean_cap, sd_floor, sd_cap};
}

/**
 * Local-constant (kernel-weighted average) fit of the one-step transition
 *
 *   X_t = m(X_{t-1}) + sigma(X_{t-1}) * eps_t
 *
 * from the consecutive pairs of an observed series.  The mean estimate at
 * x averages the targets with kernel weights K((x - X_{t-1}) / h_mean);
 * the variance estimate averages squared mean-fit residuals with
 * bandwidth h_var, which may differ from h_mean.
 *
 * Evaluations return nullopt when every kernel weight vanishes (possible
 * for compact kernels far from the data); callers decide the fallback.
 * Truncated accessors never widen that contract: they clamp defined
 * values and propagate nullopt.
 *
 * An optional pair index can be excluded at construction.  The excluded
 * pair is physically dropped from the internal arrays, so the fit is
 * identical, bit for bit, to one built on the manually reduced pair list.
 *
 * In homoscedastic mode the scale is the sample standard deviation of the
 * mean-fit residuals, clamped like any other scale value, and sd(x) never
 * returns nullopt.
 */
class EstimatedModel {
 public:
  /** Fit on a series; pairs are (series[t-1], series[t]) for t = 1..T. */
  EstimatedModel(std::span<const double> series, KernelSpec kernel, double h_mean,
                 double h_var, TruncationBounds bounds, bool homoscedastic,
                 std::optional<std::size_t> excluded_pair = std::nullopt)
      : EstimatedModel(split_series(series), kernel, h_mean, h_var, bounds,
                       homoscedastic, excluded_pair) {}

  /** Fit on an explicit pair list (predictor[i] -> target[i]). */
  static EstimatedModel from_pairs(std::vector<double> predictors,
                                   std::vector<double> targets, KernelSpec kernel,
                                   double h_mean, double h_var, TruncationBounds bounds,
                                   bool homoscedastic,
                                   std::optional<std::size_t> excluded_pair = std::nullopt) {
    return EstimatedModel(
        std::pair<std::vector<double>, std::vector<double>>{std::move(predictors),
                                                            std::move(targets)},
        kernel, h_mean, h_var, bounds, homoscedastic, excluded_pair);
  }

  /** Kernel-weighted average of targets at x, before truncation. */
  std::optional<double> raw_mean(double x) const {
    return weighted_average(pred_, targ_, x, 1.0 / h_mean_);
  }

  /** Kernel-weighted average of squared mean-fit residuals at x. */
  std::optional<double> raw_var(double x) const {
    return weighted_average(pred_, sqres_, x, 1.0 / h_var_);
  }

  /** Truncated conditional-mean estimate. */
  std::optional<double> mean(double x) const {
    auto v = raw_mean(x);
    if (!v) return std::nullopt;
    return truncate_mean(*v, bounds_);
  }

  /**
   * Truncated conditional-scale estimate: the square root of the variance
   * estimate (floored at zero) clamped into [sd_floor, sd_cap].
   */
  std::optional<double> sd(double x) const {
    if (homoscedastic_) return constant_sd_;
    auto v = raw_var(x);
    if (!v) return std::nullopt;
    return truncate_sd(std::sqrt(std::max(*v, 0.0)), bounds_);
  }

  std::span<const double> predictors() const { return pred_; }
  std::span<const double> targets() const { return targ_; }
  /** Mean-fit residuals target - raw_mean(predictor), one per kept pair. */
  std::span<const double> mean_residuals() const { return resid_; }

  const TruncationBounds& bounds() const { return bounds_; }
  const KernelSpec& kernel() const { return kernel_; }
  double h_mean() const { return h_mean_; }
  double h_var() const { return h_var_; }
  bool homoscedastic() const { return homoscedastic_; }
  /** Constant scale used in homoscedastic mode (already clamped). */
  double constant_sd() const { return constant_sd_; }
  std::size_t pair_count() const { return pred_.size(); }
  const std::optional<std::size_t>& excluded_pair() const { return excluded_; }

 private:
  EstimatedModel(std::pair<std::vector<double>, std::vector<double>> pairs,
                 KernelSpec kernel, double h_mean, double h_var,
                 TruncationBounds bounds, bool homoscedastic,
                 std::optional<std::size_t> excluded_pair)
      : kernel_(kernel),
        h_mean_(h_mean),
        h_var_(h_var),
        bounds_(bounds),
        homoscedastic_(homoscedastic),
        excluded_(excluded_pair),
        pred_(std::move(pairs.first)),
        targ_(std::move(pairs.second)) {
    if (h_mean_ <= 0.0 || h_var_ <= 0.0)
      throw std::invalid_argument("bandwidths must be positive");
    if (pred_.size() != targ_.size()) throw LengthMismatch(pred_.size(), targ_.size());
    if (excluded_) {
      if (*excluded_ >= pred_.size())
        throw std::invalid_argument("excluded pair index out of range");
      pred_.erase(pred_.begin() + static_cast<std::ptrdiff_t>(*excluded_));
      targ_.erase(targ_.begin() + static_cast<std::ptrdiff_t>(*excluded_));
    }
    if (pred_.empty()) throw EmptySample("no pairs to fit");

    // Mean-fit residuals; the denominator is positive at every kept
    // predictor because the pair's own weight is K(0) > 0.
    resid_.resize(pred_.size());
    sqres_.resize(pred_.size());
    for (std::size_t j = 0; j < pred_.size(); ++j) {
      const double fit = raw_mean(pred_[j]).value();
      resid_[j] = targ_[j] - fit;
      sqres_[j] = resid_[j] * resid_[j];
    }
    if (homoscedastic_) constant_sd_ = truncate_sd(sample_sd(resid_), bounds_);
  }

  static std::pair<std::vector<double>, std::vector<double>> split_series(
      std::span<const double> series) {
    if (series.size() < 2) throw EmptySample("series needs at least two observations");
    std::vector<double> pred(series.begin(), series.end() - 1);
    std::vector<double> targ(series.begin() + 1, series.end());
    return {std::move(pred), std::move(targ)};
  }

  std::optional<double> weighted_average(const std::vector<double>& xs,
                                         const std::vector<double>& ys, double x,
                                         double inv_h) const {
    switch (kernel_.family) {
      case KernelFamily::epanechnikov:
        return weighted_average_core<EpanechnikovKernel>(xs, ys, x, inv_h);
      case KernelFamily::gaussian:
        return weighted_average_core<GaussianKernel>(xs, ys, x, inv_h);
    }
    return std::nullopt;
  }

  template <class Kernel>
  static std::optional<double> weighted_average_core(const std::vector<double>& xs,
                                                     const std::vector<double>& ys,
                                                     double x, double inv_h) {
    double num = 0.0;
    double den = 0.0;
    const std::size_t n = xs.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double w = Kernel::eval((x - xs[j]) * inv_h);
      if (w <= 0.0) continue;
      num += w * ys[j];
      den += w;
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
  }

  KernelSpec kernel_;
  double h_mean_;
  double h_var_;
  TruncationBounds bounds_;
  bool homoscedastic_;
  std::optional<std::size_t> excluded_;
  std::vector<double> pred_;
  std::vector<double> targ_;
  std::vector<double> resid_;
  std::vector<double> sqres_;
  double constant_sd_ = 0.0;
};

}  // namespace npboot
