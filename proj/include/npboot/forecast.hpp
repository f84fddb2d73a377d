#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "npboot/bandwidth.hpp"
#include "npboot/dgp.hpp"
#include "npboot/errors.hpp"
#include "npboot/estimator.hpp"
#include "npboot/parallel.hpp"
#include "npboot/residuals.hpp"
#include "npboot/rng.hpp"
#include "npboot/stats.hpp"

namespace npboot {

enum class Loss { l2, l1 };

/** Replacement used when a simulated value comes back undefined. */
enum class GuardPolicy { mean, median };

/**
 * Fallback state for path simulation.  Undefined or non-finite pseudo
 * values are replaced by the sample mean (squared-error work) or sample
 * median (absolute-error work) of the observed data, and every
 * replacement is counted.
 */
struct GuardContext {
  GuardPolicy policy = GuardPolicy::mean;
  double fallback = 0.0;
  std::uint64_t events = 0;
};

inline GuardContext make_guard(std::span<const double> sample, GuardPolicy policy) {
  GuardContext g;
  g.policy = policy;
  g.fallback = policy == GuardPolicy::mean ? mean_of(sample) : median_of(sample);
  return g;
}

/** Pass finite values through; replace anything else and count it. */
inline double guard_value(std::optional<double> v, GuardContext& guard) {
  if (v && std::isfinite(*v)) return *v;
  ++guard.events;
  return guard.fallback;
}

/**
 * One recursion step x -> mean(x) + sd(x) * eps.  If either estimate is
 * undefined at x the whole step is replaced through the guard, so the
 * returned value is always finite.
 */
template <class Model>
double model_step(const Model& model, double x, double eps, GuardContext& guard) {
  const auto m = model.mean(x);
  const auto s = model.sd(x);
  std::optional<double> next;
  if (m && s) next = *m + *s * eps;
  return guard_value(next, guard);
}

/**
 * M simulated trajectories of length `horizon`, all starting from the
 * same origin.  Row-major storage: path m, step j (1-based) lives at
 * data[m * horizon + j - 1].  Every entry is finite.
 */
struct PathMatrix {
  std::size_t paths = 0;
  std::size_t horizon = 0;
  double origin = 0.0;
  std::vector<double> data;

  double at(std::size_t path, std::size_t step) const {
    return data[path * horizon + step - 1];
  }

  /** All endpoints at the given step (1-based horizon). */
  std::vector<double> column(std::size_t step) const {
    std::vector<double> out(paths);
    for (std::size_t m = 0; m < paths; ++m) out[m] = at(m, step);
    return out;
  }
};

/**
 * Roll M paths forward with an arbitrary innovation source.  Each path
 * owns a child stream of `stream`, so the matrix is a pure function of
 * (model, innovations, x_last, k, M, stream) no matter how callers might
 * partition the path loop.
 */
template <class Model, class InnovFn>
PathMatrix simulate_paths_with(const Model& model, InnovFn&& innov, double x_last,
                               std::size_t k, std::size_t M, RngStream stream,
                               GuardContext& guard) {
  if (k < 1) throw std::invalid_argument("horizon must be >= 1");
  if (M < 2) throw std::invalid_argument("need at least two paths");
  PathMatrix pm;
  pm.paths = M;
  pm.horizon = k;
  pm.origin = x_last;
  pm.data.resize(M * k);
  for (std::size_t m = 0; m < M; ++m) {
    auto rng = stream.substream(m).generator();
    double x = x_last;
    for (std::size_t j = 0; j < k; ++j) {
      const double eps = innov(rng);
      x = model_step(model, x, eps, guard);
      pm.data[m * k + j] = x;
    }
  }
  return pm;
}

/** Paths driven by resampled centered residuals. */
template <class Model>
PathMatrix simulate_paths(const Model& model, const ResidualDist& innovations,
                          double x_last, std::size_t k, std::size_t M, RngStream stream,
                          GuardContext& guard) {
  return simulate_paths_with(
      model, [&](Xoshiro256& g) { return draw_innovation(innovations, g); }, x_last, k,
      M, stream, guard);
}

/** Optimal point prediction: column mean under L2 loss, median under L1. */
inline double point_predict(const PathMatrix& pm, Loss loss, std::size_t step = 0) {
  if (step == 0) step = pm.horizon;
  const auto col = pm.column(step);
  return loss == Loss::l2 ? mean_of(col) : median_of(col);
}

struct Interval {
  double lower;
  double upper;
};

/**
 * Equal-tailed interval from the order statistics of `values` at ranks
 * ceil(n * alpha/2) and ceil(n * (1 - alpha/2)).
 */
inline Interval quantile_interval(std::vector<double> values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  if (values.size() < 2) throw std::invalid_argument("need at least two values");
  std::sort(values.begin(), values.end());
  return Interval{rank_quantile(values, alpha / 2.0),
                  rank_quantile(values, 1.0 - alpha / 2.0)};
}

/** Quantile prediction interval of the endpoint distribution at `step`. */
inline Interval qpi(const PathMatrix& pm, double alpha, std::size_t step = 0) {
  if (step == 0) step = pm.horizon;
  return quantile_interval(pm.column(step), alpha);
}

struct Diagnostics {
  std::uint64_t guard_events = 0;
  std::uint64_t residuals_guarded = 0;
  std::uint64_t ppi_retries = 0;
  std::uint64_t ppi_skipped = 0;
  std::uint64_t ppi_completed = 0;
};

struct PredictionResult {
  std::size_t horizon = 1;
  double l2_point = 0.0;
  double l1_point = 0.0;
  double alpha = 0.05;
  std::optional<Interval> qpi;
  std::optional<Interval> ppi;
  Diagnostics diagnostics;
};

struct ForecastOptions {
  std::size_t horizon = 1;   // k: furthest step ahead
  std::size_t paths = 1000;  // M: simulated trajectories per prediction
  double alpha = 0.05;
  ResidualKind residuals = ResidualKind::fitted;
  BandwidthStrategy strategy = BandwidthStrategy::oversmooth;
  bool homoscedastic = false;
  KernelSpec kernel{};
  GuardPolicy guard_policy = GuardPolicy::mean;
  double smoothing_sd = 0.0;
  std::optional<double> h_op;              // reuse an already selected bandwidth
  std::optional<TruncationBounds> bounds;  // override the data-driven box
  // Interval-calibration (double bootstrap) controls:
  std::size_t outer = 500;  // B: bootstrap replicates
  Loss loss = Loss::l2;     // which point predictor centers the interval
  std::size_t retry_budget = 3;
  bool exact_inner_loo = false;  // recompute leave-one-out residuals per replicate
  unsigned threads = 1;
};

namespace detail {

inline void validate_common(const ForecastOptions& o) {
  if (o.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (o.paths < 2) throw std::invalid_argument("paths must be >= 2");
  if (!(o.alpha > 0.0 && o.alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (o.smoothing_sd < 0.0) throw std::invalid_argument("smoothing_sd must be >= 0");
}

}  // namespace detail

/**
 * Everything shared by interval construction: the selected bandwidth, the
 * truncation box, the estimation-bandwidth model, and the centered
 * residual distribution.  A constant series defeats cross-validation
 * (DegenerateSample); estimation still works at any bandwidth then, so
 * the fit falls back to h_op = 1 and flags it.
 */
struct FittedForecaster {
  std::vector<double> series;
  double h_op;
  double pilot;
  bool fallback_bandwidth;
  Bandwidth bw;
  TruncationBounds bounds;
  EstimatedModel model;
  ResidualDist innovations;
  std::size_t residual_count;
  std::size_t residuals_guarded;
};

inline FittedForecaster fit_forecaster(std::span<const double> series,
                                       const ForecastOptions& o) {
  detail::validate_common(o);
  if (series.size() < 10) throw ShortSeries(series.size(), 10);

  double h_op = 0.0;
  double pilot = 0.0;
  bool fallback = false;
  if (o.h_op) {
    h_op = *o.h_op;
    if (h_op <= 0.0) throw std::invalid_argument("h_op must be positive");
  } else {
    try {
      SelectOptions sel;
      sel.kernel = o.kernel;
      const auto selected = select_bandwidth(series, sel);
      h_op = selected.h_op;
      pilot = selected.pilot;
    } catch (const DegenerateSample&) {
      h_op = 1.0;
      fallback = true;
    }
  }

  const Bandwidth bw = apply_strategy(h_op, o.strategy);
  const TruncationBounds bounds =
      o.bounds ? *o.bounds : default_bounds(series, World::real);
  EstimatedModel model(series, o.kernel, bw.h_est, bw.h_var, bounds, o.homoscedastic);
  const ResidualSet rs = o.residuals == ResidualKind::fitted
                             ? fitted_residuals(model)
                             : predictive_residuals(model);
  if (rs.values.empty())
    throw NumericalError("every residual was guarded; nothing to resample");
  ResidualDist innov = center(rs, o.smoothing_sd);

  return FittedForecaster{std::vector<double>(series.begin(), series.end()),
                          h_op,
                          pilot,
                          fallback,
                          bw,
                          bounds,
                          std::move(model),
                          std::move(innov),
                          rs.values.size(),
                          rs.guarded};
}

/**
 * Point predictions and quantile intervals for every horizon 1..k from one
 * batch of simulated paths.  Intervals are the alpha/2 and 1 - alpha/2
 * order statistics of each step's endpoint distribution.
 */
inline std::vector<PredictionResult> qpi_predict_horizons(std::span<const double> series,
                                                          const ForecastOptions& o,
                                                          RngStream stream) {
  const FittedForecaster f = fit_forecaster(series, o);
  GuardContext guard = make_guard(series, o.guard_policy);
  const PathMatrix pm = simulate_paths(f.model, f.innovations, series.back(), o.horizon,
                                       o.paths, stream, guard);
  std::vector<PredictionResult> out(o.horizon);
  for (std::size_t j = 1; j <= o.horizon; ++j) {
    auto& r = out[j - 1];
    const auto col = pm.column(j);
    r.horizon = j;
    r.l2_point = mean_of(col);
    r.l1_point = median_of(col);
    r.alpha = o.alpha;
    r.qpi = quantile_interval(col, o.alpha);
    r.diagnostics.guard_events = guard.events;
    r.diagnostics.residuals_guarded = f.residuals_guarded;
  }
  return out;
}

inline PredictionResult qpi_predict(std::span<const double> series,
                                    const ForecastOptions& o, RngStream stream) {
  return qpi_predict_horizons(series, o, stream).back();
}

/**
 * Resampled series of the same length as `sample`: the start value is
 * drawn uniformly from the observed values, then the generating model
 * rolls the recursion with resampled innovations.  Draw order: one index,
 * then one innovation per transition, all from `rng`.
 */
template <class Model>
std::vector<double> generate_bootstrap_series(const Model& gen,
                                              const ResidualDist& innovations,
                                              std::span<const double> sample,
                                              Xoshiro256& rng, GuardContext& guard) {
  if (sample.empty()) throw EmptySample();
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> out(sample.size());
  double x = sample[pick(rng)];
  out[0] = x;
  for (std::size_t i = 1; i < sample.size(); ++i) {
    const double eps = draw_innovation(innovations, rng);
    x = model_step(gen, x, eps, guard);
    out[i] = x;
  }
  return out;
}

namespace detail {

struct PpiReplicate {
  bool ok = false;
  std::vector<double> roots;  // one per horizon
  std::uint64_t guard_events = 0;
  std::uint64_t retries = 0;
};

/**
 * One double-bootstrap replicate: generate a pseudo series with the
 * generating model, refit at the estimation bandwidths inside the
 * bootstrap-world truncation box, roll the true future of the pseudo
 * world from the observed endpoint, predict that future with the refit
 * model, and report the prediction roots (future minus prediction).
 */
template <class GenModel>
PpiReplicate ppi_replicate(std::span<const double> series, const FittedForecaster& f,
                           const GenModel& gen, const ForecastOptions& o,
                           GuardContext guard, RngStream rep_stream) {
  PpiReplicate rep;
  auto rng = rep_stream.substream(0).generator();

  const std::vector<double> boot =
      generate_bootstrap_series(gen, f.innovations, series, rng, guard);
  const TruncationBounds boot_bounds =
      default_bounds(boot, World::bootstrap, &f.bounds);
  const EstimatedModel boot_model(boot, o.kernel, f.bw.h_est, f.bw.h_var, boot_bounds,
                                  o.homoscedastic);

  // Pseudo future restarted from the observed endpoint.
  std::vector<double> future(o.horizon);
  double x = series.back();
  for (std::size_t j = 0; j < o.horizon; ++j) {
    const double eps = draw_innovation(f.innovations, rng);
    x = model_step(gen, x, eps, guard);
    future[j] = x;
  }

  // Prediction in the pseudo world.  Innovations default to the original
  // centered residuals; exact mode recomputes leave-one-out residuals on
  // the pseudo series instead.
  const ResidualDist* innov = &f.innovations;
  ResidualDist exact;
  if (o.exact_inner_loo) {
    exact = center(predictive_residuals(boot_model), o.smoothing_sd);
    innov = &exact;
  }
  const PathMatrix pm = simulate_paths(boot_model, *innov, series.back(), o.horizon,
                                       o.paths, rep_stream.substream(1), guard);

  rep.roots.resize(o.horizon);
  for (std::size_t j = 1; j <= o.horizon; ++j) {
    const double root = future[j - 1] - point_predict(pm, o.loss, j);
    if (!std::isfinite(root)) throw NumericalError("non-finite prediction root");
    rep.roots[j - 1] = root;
  }
  rep.guard_events = guard.events;
  rep.ok = true;
  return rep;
}

}  // namespace detail

/**
 * Calibrated prediction intervals for horizons 1..k.  The interval at
 * step j is centered at the optimal point prediction and widened by the
 * alpha/2 and 1 - alpha/2 quantiles of B resampled prediction roots, so
 * it prices in estimation error on top of innovation spread.  Replicates
 * that break down numerically are retried on fresh substreams up to
 * retry_budget times, then skipped and counted.
 */
inline std::vector<PredictionResult> ppi_predict_horizons(std::span<const double> series,
                                                          const ForecastOptions& o,
                                                          RngStream stream) {
  if (series.size() < 20) throw ShortSeries(series.size(), 20);
  if (o.outer < 50) throw std::invalid_argument("need at least 50 bootstrap replicates");

  const FittedForecaster f = fit_forecaster(series, o);
  const EstimatedModel gen_model(series, o.kernel, f.bw.g_gen, generation_h_var(f.bw),
                                 f.bounds, o.homoscedastic);
  const GuardPolicy policy = o.loss == Loss::l1 ? GuardPolicy::median : GuardPolicy::mean;
  const GuardContext guard_proto = make_guard(series, policy);

  // Point predictions in the real world.
  GuardContext point_guard = guard_proto;
  const PathMatrix pm = simulate_paths(f.model, f.innovations, series.back(), o.horizon,
                                       o.paths, stream.substream(0), point_guard);
  std::vector<double> centers(o.horizon);
  for (std::size_t j = 1; j <= o.horizon; ++j)
    centers[j - 1] = point_predict(pm, o.loss, j);

  // Root distribution across replicates.
  const RngStream boot_stream = stream.substream(1);
  std::vector<detail::PpiReplicate> reps(o.outer);
  parallel_for(o.outer, o.threads, [&](std::size_t b) {
    const RngStream rep_root = boot_stream.substream(b);
    for (std::size_t attempt = 0; attempt <= o.retry_budget; ++attempt) {
      try {
        reps[b] = detail::ppi_replicate(series, f, gen_model, o, guard_proto,
                                        rep_root.substream(attempt));
        reps[b].retries = attempt;
        return;
      } catch (const Error&) {
        continue;
      }
    }
    reps[b] = detail::PpiReplicate{};
    reps[b].retries = o.retry_budget;
  });

  Diagnostics diag;
  diag.guard_events = point_guard.events;
  diag.residuals_guarded = f.residuals_guarded;
  std::vector<std::vector<double>> roots(o.horizon);
  for (const auto& rep : reps) {
    diag.ppi_retries += rep.retries;
    if (!rep.ok) {
      ++diag.ppi_skipped;
      continue;
    }
    ++diag.ppi_completed;
    diag.guard_events += rep.guard_events;
    for (std::size_t j = 0; j < o.horizon; ++j) roots[j].push_back(rep.roots[j]);
  }
  if (diag.ppi_completed < 2)
    throw NumericalError("too few usable bootstrap replicates");

  std::vector<PredictionResult> out(o.horizon);
  for (std::size_t j = 1; j <= o.horizon; ++j) {
    auto& r = out[j - 1];
    const auto col = pm.column(j);
    r.horizon = j;
    r.l2_point = mean_of(col);
    r.l1_point = median_of(col);
    r.alpha = o.alpha;
    r.qpi = quantile_interval(col, o.alpha);
    std::sort(roots[j - 1].begin(), roots[j - 1].end());
    const double center = centers[j - 1];
    r.ppi = Interval{center + rank_quantile(roots[j - 1], o.alpha / 2.0),
                     center + rank_quantile(roots[j - 1], 1.0 - o.alpha / 2.0)};
    r.diagnostics = diag;
  }
  return out;
}

inline PredictionResult ppi_predict(std::span<const double> series,
                                    const ForecastOptions& o, RngStream stream) {
  return ppi_predict_horizons(series, o, stream).back();
}

/** Adapter letting the true process drive the shared path machinery. */
struct OracleModel {
  const DGPSpec* dgp;
  std::optional<double> mean(double x) const { return dgp->mean(x); }
  std::optional<double> sd(double x) const { return dgp->sd(x); }
};

/**
 * Benchmark reference: paths rolled with the true mean, scale, and
 * innovation law, conditioned on the observed endpoint.  Points and
 * intervals come from the same loss and quantile rules as the estimated
 * versions, so differences against them isolate estimation error.
 */
inline std::vector<PredictionResult> oracle_predict_horizons(const DGPSpec& dgp,
                                                             double x_last,
                                                             std::size_t k, std::size_t M,
                                                             double alpha,
                                                             RngStream stream) {
  if (k < 1) throw std::invalid_argument("horizon must be >= 1");
  if (M < 2) throw std::invalid_argument("need at least two paths");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  const OracleModel om{&dgp};
  GuardContext guard;
  guard.fallback = x_last;
  const PathMatrix pm = simulate_paths_with(
      om, [&](Xoshiro256& g) { return draw_innovation(dgp, g); }, x_last, k, M, stream,
      guard);
  std::vector<PredictionResult> out(k);
  for (std::size_t j = 1; j <= k; ++j) {
    auto& r = out[j - 1];
    const auto col = pm.column(j);
    r.horizon = j;
    r.l2_point = mean_of(col);
    r.l1_point = median_of(col);
    r.alpha = alpha;
    r.qpi = quantile_interval(col, alpha);
    r.diagnostics.guard_events = guard.events;
  }
  return out;
}

inline PredictionResult oracle_predict(const DGPSpec& dgp, double x_last, std::size_t k,
                                       std::size_t M, double alpha, RngStream stream) {
  return oracle_predict_horizons(dgp, x_last, k, M, alpha, stream).back();
}

}  // namespace npboot
