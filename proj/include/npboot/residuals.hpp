#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "npboot/errors.hpp"
#include "npboot/estimator.hpp"
#include "npboot/rng.hpp"

namespace npboot {

enum class ResidualKind { fitted, predictive };

/**
 * Standardized one-step residuals (X_t - mean(X_{t-1})) / sd(X_{t-1}) in
 * pair order.  Pairs whose estimate is undefined (no kernel mass at the
 * predictor) are dropped rather than imputed; `guarded` counts them.
 */
struct ResidualSet {
  std::vector<double> values;
  ResidualKind kind = ResidualKind::fitted;
  std::size_t guarded = 0;
};

/**
 * Innovation distribution for resampling: centered residuals stored in
 * ascending order, optionally convolved with a small Gaussian at draw
 * time (smoothing_sd = 0 disables the perturbation, the default).
 */
struct ResidualDist {
  std::vector<double> values;
  double smoothing_sd = 0.0;
  ResidualKind kind = ResidualKind::fitted;
};

/**
 * Evaluate the standardized-residual formula for explicit pairs against
 * any model exposing mean(x) and sd(x) as optional<double>.  Shared by the
 * fitted and predictive extractors and handy for tests that stipulate the
 * estimates directly.
 */
template <class Model>
ResidualSet residuals_for_pairs(const Model& model, std::span<const double> predictors,
                                std::span<const double> targets, ResidualKind label) {
  if (predictors.size() != targets.size())
    throw LengthMismatch(predictors.size(), targets.size());
  ResidualSet out;
  out.kind = label;
  out.values.reserve(predictors.size());
  for (std::size_t t = 0; t < predictors.size(); ++t) {
    const auto m = model.mean(predictors[t]);
    const auto s = model.sd(predictors[t]);
    if (!m || !s || !(std::isfinite(*m) && std::isfinite(*s)) || *s <= 0.0) {
      ++out.guarded;
      continue;
    }
    out.values.push_back((targets[t] - *m) / *s);
  }
  return out;
}

/**
 * Residuals of the model's own training pairs.  With a self-inclusive
 * kernel average the estimate is always defined at a training predictor,
 * so guarded stays zero here in practice.
 */
inline ResidualSet fitted_residuals(const EstimatedModel& model) {
  return residuals_for_pairs(model, model.predictors(), model.targets(),
                             ResidualKind::fitted);
}

/**
 * Leave-one-out residuals: pair t is scored by the model refit with pair t
 * deleted, keeping the template's bandwidths, bounds, kernel, and mode.
 * Each refit matches a manual fit on the reduced pair list bit for bit.
 * These widen the fitted residuals and give resampling a more honest view
 * of out-of-sample error.  Cost is one refit per pair.
 */
inline ResidualSet predictive_residuals(const EstimatedModel& model) {
  if (model.excluded_pair())
    throw std::invalid_argument("template model must not already exclude a pair");
  const auto pred = model.predictors();
  const auto targ = model.targets();
  if (pred.size() < 2) throw EmptySample("need at least two pairs for leave-one-out");
  ResidualSet out;
  out.kind = ResidualKind::predictive;
  out.values.reserve(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const EstimatedModel loo = EstimatedModel::from_pairs(
        {pred.begin(), pred.end()}, {targ.begin(), targ.end()}, model.kernel(),
        model.h_mean(), model.h_var(), model.bounds(), model.homoscedastic(), t);
    const auto m = loo.mean(pred[t]);
    const auto s = loo.sd(pred[t]);
    if (!m || !s || !(std::isfinite(*m) && std::isfinite(*s)) || *s <= 0.0) {
      ++out.guarded;
      continue;
    }
    out.values.push_back((targ[t] - *m) / *s);
  }
  return out;
}

/**
 * Center the residuals to mean zero and sort ascending.  Centering is done
 * in two passes so the residual mean is zero to machine precision even for
 * long samples.
 */
inline ResidualDist center(const ResidualSet& rs, double smoothing_sd = 0.0) {
  if (rs.values.empty()) throw EmptySample("no residuals to center");
  if (smoothing_sd < 0.0) throw std::invalid_argument("smoothing_sd must be >= 0");
  ResidualDist out;
  out.kind = rs.kind;
  out.smoothing_sd = smoothing_sd;
  out.values = rs.values;
  for (int pass = 0; pass < 2; ++pass) {
    const double m = mean_of(out.values);
    for (double& v : out.values) v -= m;
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

/** One draw with replacement, plus the optional Gaussian perturbation. */
inline double draw_innovation(const ResidualDist& dist, Xoshiro256& rng) {
  if (dist.values.empty()) throw EmptyDistribution();
  std::uniform_int_distribution<std::size_t> pick(0, dist.values.size() - 1);
  double v = dist.values[pick(rng)];
  if (dist.smoothing_sd > 0.0) {
    std::normal_distribution<double> noise(0.0, dist.smoothing_sd);
    v += noise(rng);
  }
  return v;
}

inline std::vector<double> sample_innovations(const ResidualDist& dist, std::size_t n,
                                              Xoshiro256& rng) {
  if (dist.values.empty()) throw EmptyDistribution();
  std::vector<double> out(n);
  for (auto& v : out) v = draw_innovation(dist, rng);
  return out;
}

}  // namespace npboot
