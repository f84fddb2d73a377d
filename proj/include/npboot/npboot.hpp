#pragma once

// Forecasting for nonlinear autoregressions: local-constant estimation,
// residual resampling, simulated predictive paths, quantile and calibrated
// prediction intervals, and a Monte-Carlo harness.  Everything is
// header-only; include this to get the full library (the CLI front end in
// cli.hpp is separate so library users do not pull in argument parsing).

#include "npboot/bandwidth.hpp"
#include "npboot/benchmark.hpp"
#include "npboot/dgp.hpp"
#include "npboot/errors.hpp"
#include "npboot/estimator.hpp"
#include "npboot/forecast.hpp"
#include "npboot/io.hpp"
#include "npboot/kernel.hpp"
#include "npboot/metrics.hpp"
#include "npboot/parallel.hpp"
#include "npboot/residuals.hpp"
#include "npboot/rng.hpp"
#include "npboot/stats.hpp"
