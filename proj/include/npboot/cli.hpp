#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "npboot/benchmark.hpp"
#include "npboot/forecast.hpp"
#include "npboot/io.hpp"

namespace npboot {

namespace detail {

inline BandwidthStrategy strategy_from_name(const std::string& s) {
  if (s == "u" || s == "B1" || s == "undersmooth") return BandwidthStrategy::undersmooth;
  if (s == "o" || s == "B2" || s == "oversmooth") return BandwidthStrategy::oversmooth;
  if (s == "opv" || s == "optimal-variance") return BandwidthStrategy::optimal_variance;
  throw ConfigError("unknown strategy: " + s);
}

inline const char* strategy_name(BandwidthStrategy s) {
  switch (s) {
    case BandwidthStrategy::undersmooth: return "undersmooth";
    case BandwidthStrategy::oversmooth: return "oversmooth";
    default: return "optimal-variance";
  }
}

inline ResidualKind residuals_from_name(const std::string& s) {
  if (s == "f" || s == "fitted") return ResidualKind::fitted;
  if (s == "p" || s == "predictive") return ResidualKind::predictive;
  throw ConfigError("unknown residual kind: " + s);
}

inline KernelSpec kernel_from_name(const std::string& s) {
  KernelSpec k;
  if (s == "epanechnikov") k.family = KernelFamily::epanechnikov;
  else if (s == "gaussian") k.family = KernelFamily::gaussian;
  else throw ConfigError("unknown kernel: " + s);
  return k;
}

inline std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

inline nlohmann::ordered_json diagnostics_json(const Diagnostics& d) {
  nlohmann::ordered_json j;
  j["guard_events"] = d.guard_events;
  j["residuals_guarded"] = d.residuals_guarded;
  j["ppi_retries"] = d.ppi_retries;
  j["ppi_skipped"] = d.ppi_skipped;
  j["ppi_completed"] = d.ppi_completed;
  return j;
}

inline void write_text(const std::string& text, const std::string& path,
                       std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << text;
}

struct CommonFitArgs {
  std::string file;
  std::string kernel = "epanechnikov";
  std::string strategy = "oversmooth";
  std::string residuals = "fitted";
  bool homoscedastic = false;
  double h_op = 0.0;  // 0 means cross-validate
  double smoothing_sd = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("file", file, "CSV file, one value per row")->required();
    cmd->add_option("--kernel", kernel, "epanechnikov|gaussian");
    cmd->add_option("--strategy", strategy,
                    "B1|B2|opv (aliases: u[ndersmooth]|o[versmooth]|optimal-variance)");
    cmd->add_option("--residuals", residuals, "fitted|predictive");
    cmd->add_flag("--homoscedastic", homoscedastic,
                  "constant error scale instead of a local estimate");
    cmd->add_option("--bandwidth", h_op,
                    "fix the base bandwidth instead of cross-validating")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--smoothing-sd", smoothing_sd,
                    "add N(0, sd^2) jitter to resampled residuals")
        ->check(CLI::NonNegativeNumber);
  }

  void apply(ForecastOptions& o) const {
    o.kernel = kernel_from_name(kernel);
    o.strategy = strategy_from_name(strategy);
    o.residuals = residuals_from_name(residuals);
    o.homoscedastic = homoscedastic;
    o.smoothing_sd = smoothing_sd;
    if (h_op > 0.0) o.h_op = h_op;
  }
};

inline int do_fit(const CommonFitArgs& a, std::ostream& out) {
  const auto series = ingest_csv(a.file);
  ForecastOptions o;
  a.apply(o);
  const auto f = fit_forecaster(series, o);

  nlohmann::ordered_json j;
  j["observations"] = series.size();
  j["pairs"] = f.model.pair_count();
  j["h_op"] = f.h_op;
  j["pilot"] = f.pilot;
  j["fallback_bandwidth"] = f.fallback_bandwidth;
  j["bandwidths"] = {{"h_est", f.bw.h_est},
                     {"g_gen", f.bw.g_gen},
                     {"h_var", f.bw.h_var},
                     {"strategy", strategy_name(f.bw.strategy)}};
  j["bounds"] = {{"mean_cap", f.bounds.mean_cap},
                 {"sd_floor", f.bounds.sd_floor},
                 {"sd_cap", f.bounds.sd_cap}};
  j["homoscedastic"] = a.homoscedastic;
  j["residuals"] = {{"kind", a.residuals == "p" || a.residuals == "predictive"
                                 ? "predictive"
                                 : "fitted"},
                    {"count", f.residual_count},
                    {"guarded", f.residuals_guarded}};
  out << j.dump(2) << "\n";
  return 0;
}

}  // namespace detail

/**
 * Command-line front end.  args excludes the program name.  Exit codes:
 * 0 success, 1 usage error, 2 input/config error, 3 numerical failure.
 */
inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"forward-bootstrap forecasting for nonlinear autoregressions"};
  app.name("npboot");
  app.require_subcommand(0, 1);
  {
    std::string footer = "Benchmark presets:";
    for (const auto& n : preset_names()) footer += "\n  " + n;
    app.footer(footer);
  }

  // --- fit ---------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand(
      "fit", "estimate bandwidth, local mean/scale fit, residuals");
  detail::CommonFitArgs fit_args;
  fit_args.attach(fit_cmd);

  // --- predict -----------------------------------------------------------
  auto* predict_cmd =
      app.add_subcommand("predict", "point predictions for horizons 1..k");
  detail::CommonFitArgs predict_args;
  predict_args.attach(predict_cmd);
  std::size_t predict_k = 1;
  std::size_t predict_paths = 1000;
  std::uint64_t predict_seed = 0;
  bool predict_seed_set = false;
  predict_cmd->add_option("--k", predict_k, "forecast horizon")
      ->check(CLI::PositiveNumber);
  predict_cmd->add_option("--paths", predict_paths, "simulated paths")
      ->check(CLI::Range(static_cast<std::size_t>(2), static_cast<std::size_t>(100000000)));
  predict_cmd->add_option("--seed", predict_seed, "RNG seed (default: entropy)")
      ->each([&](const std::string&) { predict_seed_set = true; });

  // --- interval ----------------------------------------------------------
  auto* interval_cmd =
      app.add_subcommand("interval", "prediction intervals for horizons 1..k");
  detail::CommonFitArgs interval_args;
  interval_args.attach(interval_cmd);
  std::size_t interval_k = 1;
  std::size_t interval_paths = 1000;
  std::size_t interval_outer = 0;  // 0: quantile interval only
  double interval_alpha = 0.05;
  std::string interval_loss = "l2";
  std::uint64_t interval_seed = 0;
  bool interval_seed_set = false;
  unsigned interval_threads = 1;
  std::size_t interval_retry = 3;
  interval_cmd->add_option("--k", interval_k, "forecast horizon")
      ->check(CLI::PositiveNumber);
  interval_cmd->add_option("--alpha", interval_alpha, "miscoverage level")
      ->check(CLI::Range(1e-6, 0.999999));
  interval_cmd->add_option("--paths", interval_paths, "simulated paths")
      ->check(CLI::Range(static_cast<std::size_t>(2), static_cast<std::size_t>(100000000)));
  interval_cmd->add_option(
      "--B", interval_outer,
      "bootstrap replicates; setting this adds a calibrated interval (min 50)");
  interval_cmd->add_option("--loss", interval_loss, "l2|l1 interval center");
  interval_cmd->add_option("--seed", interval_seed, "RNG seed (default: entropy)")
      ->each([&](const std::string&) { interval_seed_set = true; });
  interval_cmd->add_option("--threads", interval_threads, "worker threads (ppi)")
      ->check(CLI::PositiveNumber);
  interval_cmd->add_option("--retry-budget", interval_retry,
                           "resample attempts per failed bootstrap replicate");

  // --- benchmark ---------------------------------------------------------
  auto* bench_cmd = app.add_subcommand(
      "benchmark", "Monte-Carlo comparison of methods on a synthetic model");
  std::string bench_preset;
  std::string bench_config;
  std::string bench_format = "markdown";
  std::string bench_output;
  bool bench_list = false;
  std::size_t bench_n = 0;
  std::size_t bench_t = 0;
  std::uint64_t bench_seed = 0;
  bool bench_seed_set = false;
  unsigned bench_threads = 0;
  {
    std::string help = "named experiment; one of: ";
    const auto names = preset_names();
    for (std::size_t i = 0; i < names.size(); ++i)
      help += (i ? ", " : "") + names[i];
    bench_cmd->add_option("--preset", bench_preset, help);
  }
  bench_cmd->add_option("--config", bench_config, "JSON experiment config")
      ->excludes(bench_cmd->get_option("--preset"));
  bench_cmd->add_flag("--list-presets", bench_list, "print preset names and exit");
  bench_cmd->add_option("--n", bench_n, "override replication count")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--t", bench_t, "override series length")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_seed, "RNG seed (default: entropy)")
      ->each([&](const std::string&) { bench_seed_set = true; });
  bench_cmd->add_option("--threads", bench_threads, "worker threads")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--format", bench_format, "markdown|csv|json");
  bench_cmd->add_option("--output", bench_output, "write the table to a file");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return detail::do_fit(fit_args, out);

    if (*predict_cmd) {
      const auto series = ingest_csv(predict_args.file);
      ForecastOptions o;
      predict_args.apply(o);
      o.horizon = predict_k;
      o.paths = predict_paths;
      const std::uint64_t seed =
          predict_seed_set ? predict_seed : detail::entropy_seed();
      const auto rs = qpi_predict_horizons(series, o, RngStream(seed));

      nlohmann::ordered_json j;
      j["seed"] = seed;
      j["paths"] = predict_paths;
      auto rows = nlohmann::ordered_json::array();
      for (const auto& r : rs)
        rows.push_back({{"horizon", r.horizon}, {"l2", r.l2_point}, {"l1", r.l1_point}});
      j["points"] = std::move(rows);
      j["diagnostics"] = detail::diagnostics_json(rs.back().diagnostics);
      out << j.dump(2) << "\n";
      return 0;
    }

    if (*interval_cmd) {
      const bool want_ppi = interval_outer > 0;
      if (want_ppi && interval_outer < 50) {
        err << "--B must be at least 50 (or omitted for a quantile interval only)\n";
        return 1;
      }
      const auto series = ingest_csv(interval_args.file);
      ForecastOptions o;
      interval_args.apply(o);
      o.horizon = interval_k;
      o.paths = interval_paths;
      o.alpha = interval_alpha;
      o.outer = interval_outer;
      o.threads = interval_threads;
      o.retry_budget = interval_retry;
      if (interval_loss == "l1") o.loss = Loss::l1;
      else if (interval_loss != "l2") throw ConfigError("unknown loss: " + interval_loss);
      o.guard_policy = o.loss == Loss::l1 ? GuardPolicy::median : GuardPolicy::mean;

      const std::uint64_t seed =
          interval_seed_set ? interval_seed : detail::entropy_seed();
      const auto rs = want_ppi ? ppi_predict_horizons(series, o, RngStream(seed))
                               : qpi_predict_horizons(series, o, RngStream(seed));

      nlohmann::ordered_json j;
      j["seed"] = seed;
      j["alpha"] = interval_alpha;
      auto rows = nlohmann::ordered_json::array();
      for (const auto& r : rs) {
        nlohmann::ordered_json row{{"horizon", r.horizon},
                                   {"l2", r.l2_point},
                                   {"l1", r.l1_point},
                                   {"qpi_lower", r.qpi->lower},
                                   {"qpi_upper", r.qpi->upper}};
        if (want_ppi) {
          row["ppi_lower"] = r.ppi->lower;
          row["ppi_upper"] = r.ppi->upper;
        }
        rows.push_back(std::move(row));
      }
      j["intervals"] = std::move(rows);
      j["diagnostics"] = detail::diagnostics_json(rs.back().diagnostics);
      out << j.dump(2) << "\n";
      return 0;
    }

    if (*bench_cmd) {
      if (bench_list) {
        for (const auto& n : preset_names()) out << n << "\n";
        return 0;
      }
      if (bench_preset.empty() && bench_config.empty()) {
        err << "benchmark requires --preset or --config (see --list-presets)\n";
        return 1;
      }
      ExperimentConfig cfg;
      bool seed_known = bench_seed_set;
      if (!bench_preset.empty()) {
        cfg = preset(bench_preset);
      } else {
        std::ifstream f(bench_config);
        if (!f) throw FileNotFound(bench_config);
        nlohmann::json parsed;
        try {
          parsed = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        cfg = config_from_json(parsed);
        seed_known = seed_known || parsed.contains("seed");
      }
      if (bench_n > 0) cfg.N = bench_n;
      if (bench_t > 0) cfg.T = bench_t;
      if (bench_threads > 0) cfg.threads = bench_threads;
      if (bench_seed_set) cfg.seed = bench_seed;
      if (!seed_known) {
        cfg.seed = detail::entropy_seed();
        err << "seed " << cfg.seed << "\n";  // so the run can be reproduced
      }

      TableFormat fmt;
      if (bench_format == "markdown") fmt = TableFormat::markdown;
      else if (bench_format == "csv") fmt = TableFormat::csv;
      else if (bench_format == "json") fmt = TableFormat::json;
      else throw ConfigError("unknown format: " + bench_format);

      const auto table = run_experiment(cfg);
      detail::write_text(emit_table(table, fmt), bench_output, out);
      return 0;
    }

    out << app.help();
    return 0;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace npboot
