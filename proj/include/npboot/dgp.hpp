#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "npboot/errors.hpp"
#include "npboot/rng.hpp"

namespace npboot {

enum class InnovationKind { std_normal, chisq3_centered, two_point, custom };

/**
 * A first-order simulation model X_t = mean(X_{t-1}) + sd(X_{t-1}) * eps_t
 * with a named innovation law.  `homoscedastic` is a hint consumed by the
 * benchmark layer when it configures estimators for series drawn from this
 * process; the generator itself just runs the recursion.
 */
struct DGPSpec {
  std::string name;
  std::function<double(double)> mean;
  std::function<double(double)> sd;
  InnovationKind innovation = InnovationKind::std_normal;
  std::function<double(Xoshiro256&)> custom_innovation;
  int burn_in = 200;
  bool homoscedastic = false;
};

inline double draw_innovation(const DGPSpec& dgp, Xoshiro256& rng) {
  switch (dgp.innovation) {
    case InnovationKind::std_normal: {
      std::normal_distribution<double> d(0.0, 1.0);
      return d(rng);
    }
    case InnovationKind::chisq3_centered: {
      // Mean zero but variance 6; used as-is, with no rescaling.
      std::chi_squared_distribution<double> d(3.0);
      return d(rng) - 3.0;
    }
    case InnovationKind::two_point: {
      std::uniform_int_distribution<int> d(0, 1);
      return d(rng) == 0 ? -1.0 : 1.0;
    }
    case InnovationKind::custom:
      if (!dgp.custom_innovation)
        throw std::invalid_argument("custom innovation function not set");
      return dgp.custom_innovation(rng);
  }
  throw std::invalid_argument("unknown innovation kind");
}

/** Log-quadratic mean, unit scale: mean(x) = log(x^2 + 1), sd = 1. */
inline DGPSpec dgp_log_quadratic() {
  DGPSpec d;
  d.name = "model1";
  d.mean = [](double x) { return std::log(x * x + 1.0); };
  d.sd = [](double) { return 1.0; };
  d.homoscedastic = true;
  return d;
}

/** Sine mean with state-dependent scale: sd(x) = sqrt(0.5 + 0.25 x^2). */
inline DGPSpec dgp_sine_hetero() {
  DGPSpec d;
  d.name = "model2";
  d.mean = [](double x) { return std::sin(x); };
  d.sd = [](double x) { return std::sqrt(0.5 + 0.25 * x * x); };
  d.homoscedastic = false;
  return d;
}

inline DGPSpec dgp_preset(std::string_view name) {
  if (name == "model1-normal") {
    DGPSpec d = dgp_log_quadratic();
    d.name = std::string(name);
    return d;
  }
  if (name == "model1-chisq") {
    DGPSpec d = dgp_log_quadratic();
    d.innovation = InnovationKind::chisq3_centered;
    d.name = std::string(name);
    return d;
  }
  if (name == "model2-normal") {
    DGPSpec d = dgp_sine_hetero();
    d.name = std::string(name);
    return d;
  }
  throw ConfigError("unknown dgp preset: " + std::string(name));
}

struct SeriesWithFuture {
  std::vector<double> series;  // length T + 1
  std::vector<double> future;  // the next k values of the same trajectory
};

/**
 * Draw X_0 ~ Uniform(-1, 1), run the recursion burn_in + T + k steps, and
 * return the last T + 1 values as the observed series plus the k values
 * after it as the unobserved continuation.  One innovation stream drives
 * the whole trajectory, so the series for (T, k) and (T, k') agree.
 */
inline SeriesWithFuture generate_series_with_future(const DGPSpec& dgp, std::size_t T,
                                                    std::size_t k, RngStream stream) {
  if (dgp.burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");
  if (!dgp.mean || !dgp.sd) throw std::invalid_argument("dgp needs mean and sd");
  auto rng = stream.generator();
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  double x = start(rng);

  const auto burn = static_cast<std::size_t>(dgp.burn_in);
  const std::size_t total = burn + T + k;  // steps after X_0
  SeriesWithFuture out;
  out.series.reserve(T + 1);
  out.future.reserve(k);
  if (burn == 0) out.series.push_back(x);
  for (std::size_t i = 1; i <= total; ++i) {
    x = dgp.mean(x) + dgp.sd(x) * draw_innovation(dgp, rng);
    if (i >= burn) {
      if (i <= burn + T)
        out.series.push_back(x);
      else
        out.future.push_back(x);
    }
  }
  return out;
}

/** Observed series only; see generate_series_with_future. */
inline std::vector<double> generate_series(const DGPSpec& dgp, std::size_t T,
                                           RngStream stream) {
  return generate_series_with_future(dgp, T, 0, stream).series;
}

}  // namespace npboot
