#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npboot/bandwidth.hpp"
#include "npboot/dgp.hpp"
#include "npboot/errors.hpp"
#include "npboot/forecast.hpp"
#include "npboot/metrics.hpp"
#include "npboot/parallel.hpp"
#include "npboot/rng.hpp"

namespace npboot {

enum class MethodFamily {
  point,         // simulated point prediction (L2 or L1)
  oracle_point,  // point prediction from the true model
  qpi,           // quantile interval around the simulated paths
  ppi,           // calibrated interval from bootstrap roots
  spi            // quantile interval from the true model's paths
};

/**
 * Parsed form of a method descriptor such as "L2-Bootstrap", "QPI-p",
 * "L1-PPI-f-u", or "SPI".  The descriptor fixes the loss, the residual
 * kind (f = fitted, p = predictive), and the bandwidth strategy
 * (u = undersmooth, o = oversmooth, opv = optimal variance; default
 * oversmooth, which keeps the estimation bandwidth at the cross-validated
 * value).
 */
struct MethodSpec {
  std::string label;
  MethodFamily family = MethodFamily::point;
  Loss loss = Loss::l2;
  ResidualKind residuals = ResidualKind::fitted;
  BandwidthStrategy strategy = BandwidthStrategy::oversmooth;
};

inline MethodSpec parse_method(const std::string& label) {
  MethodSpec spec;
  spec.label = label;

  std::vector<std::string> tok;
  std::size_t start = 0;
  while (start <= label.size()) {
    const auto dash = label.find('-', start);
    if (dash == std::string::npos) {
      tok.push_back(label.substr(start));
      break;
    }
    tok.push_back(label.substr(start, dash - start));
    start = dash + 1;
  }

  auto fail = [&]() -> MethodSpec {
    throw ConfigError("unrecognized method descriptor: " + label);
  };
  auto take_strategy = [&](const std::string& s) {
    if (s == "u") spec.strategy = BandwidthStrategy::undersmooth;
    else if (s == "o") spec.strategy = BandwidthStrategy::oversmooth;
    else if (s == "opv") spec.strategy = BandwidthStrategy::optimal_variance;
    else fail();
  };
  auto take_kind = [&](const std::string& s) {
    if (s == "f") spec.residuals = ResidualKind::fitted;
    else if (s == "p") spec.residuals = ResidualKind::predictive;
    else fail();
  };

  if (tok.size() == 1 && tok[0] == "SPI") {
    spec.family = MethodFamily::spi;
    return spec;
  }
  if (tok[0] == "QPI") {
    if (tok.size() < 2 || tok.size() > 3) fail();
    spec.family = MethodFamily::qpi;
    take_kind(tok[1]);
    if (tok.size() == 3) take_strategy(tok[2]);
    return spec;
  }
  if (tok[0] == "L2") spec.loss = Loss::l2;
  else if (tok[0] == "L1") spec.loss = Loss::l1;
  else fail();

  if (tok.size() == 2 && tok[1] == "Bootstrap") {
    spec.family = MethodFamily::point;
    return spec;
  }
  if (tok.size() == 2 && tok[1] == "Oracle") {
    spec.family = MethodFamily::oracle_point;
    return spec;
  }
  if ((tok.size() == 3 || tok.size() == 4) && tok[1] == "PPI") {
    spec.family = MethodFamily::ppi;
    take_kind(tok[2]);
    if (tok.size() == 4) take_strategy(tok[3]);
    return spec;
  }
  return fail();
}

inline std::vector<MethodSpec> parse_methods(const std::vector<std::string>& labels) {
  std::vector<MethodSpec> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(parse_method(l));
  return out;
}

/** Full description of one simulation experiment. */
struct ExperimentConfig {
  std::string name;
  DGPSpec dgp;
  std::size_t T = 100;       // observed series has T + 1 values
  std::size_t N = 500;       // replications
  std::size_t M = 1000;      // simulated paths per prediction
  std::size_t B = 500;       // bootstrap replicates per calibrated interval
  std::optional<std::size_t> inner_paths;  // path count inside each replicate
  std::size_t k_max = 5;
  double alpha = 0.05;
  std::vector<MethodSpec> methods;
  KernelSpec kernel;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double smoothing_sd = 0.0;
  std::size_t retry_budget = 3;
};

namespace detail {

struct MethodRep {
  bool ok = false;
  std::uint64_t guards = 0;
  std::vector<double> points, lowers, uppers;  // one entry per horizon
};

inline void fill_from_results(MethodRep& out, const std::vector<PredictionResult>& rs,
                              bool point_is_l1, bool take_ppi) {
  out.points.reserve(rs.size());
  for (const auto& r : rs) {
    out.points.push_back(point_is_l1 ? r.l1_point : r.l2_point);
    const auto& iv = take_ppi ? r.ppi : r.qpi;
    out.lowers.push_back(iv ? iv->lower : std::numeric_limits<double>::quiet_NaN());
    out.uppers.push_back(iv ? iv->upper : std::numeric_limits<double>::quiet_NaN());
  }
  if (!rs.empty())
    out.guards = rs.back().diagnostics.guard_events + rs.back().diagnostics.residuals_guarded;
  out.ok = true;
}

/** One replication: fresh series, shared bandwidth, every method on it. */
inline std::vector<MethodRep> run_replication(const ExperimentConfig& cfg,
                                              RngStream rep_stream) {
  const auto data = generate_series_with_future(cfg.dgp, cfg.T, cfg.k_max,
                                                rep_stream.substream(0));

  // All methods in a replication share one cross-validated bandwidth; the
  // strategy multipliers are applied per method downstream.
  std::optional<double> h_op;
  bool h_ready = false;
  auto shared_h = [&]() -> std::optional<double> {
    if (!h_ready) {
      try {
        SelectOptions sel;
        sel.kernel = cfg.kernel;
        h_op = select_bandwidth(data.series, sel).h_op;
      } catch (const DegenerateSample&) {
        h_op = 1.0;  // flat series: any bandwidth reproduces the constant fit
      }
      h_ready = true;
    }
    return h_op;
  };

  std::vector<MethodRep> out(cfg.methods.size());
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const auto& spec = cfg.methods[mi];
    const RngStream method_stream = rep_stream.substream(1 + mi);
    auto& rep = out[mi];
    try {
      if (spec.family == MethodFamily::oracle_point || spec.family == MethodFamily::spi) {
        const auto rs = oracle_predict_horizons(cfg.dgp, data.series.back(), cfg.k_max,
                                                cfg.M, cfg.alpha, method_stream);
        fill_from_results(rep, rs,
                          spec.family == MethodFamily::oracle_point && spec.loss == Loss::l1,
                          /*take_ppi=*/false);
        continue;
      }

      ForecastOptions o;
      o.horizon = cfg.k_max;
      o.alpha = cfg.alpha;
      o.residuals = spec.residuals;
      o.strategy = spec.strategy;
      o.homoscedastic = cfg.dgp.homoscedastic;
      o.kernel = cfg.kernel;
      o.smoothing_sd = cfg.smoothing_sd;
      o.h_op = shared_h();
      o.loss = spec.loss;
      o.guard_policy = spec.loss == Loss::l1 ? GuardPolicy::median : GuardPolicy::mean;
      o.retry_budget = cfg.retry_budget;

      if (spec.family == MethodFamily::ppi) {
        o.paths = cfg.inner_paths.value_or(cfg.M);
        o.outer = cfg.B;
        fill_from_results(rep, ppi_predict_horizons(data.series, o, method_stream),
                          spec.loss == Loss::l1, /*take_ppi=*/true);
      } else {
        o.paths = cfg.M;
        fill_from_results(rep, qpi_predict_horizons(data.series, o, method_stream),
                          spec.family == MethodFamily::point && spec.loss == Loss::l1,
                          /*take_ppi=*/false);
      }
    } catch (const Error&) {
      rep = MethodRep{};  // replication failed for this method; counted, not fatal
    }
  }
  return out;
}

}  // namespace detail

/**
 * Monte-Carlo evaluation: N replications of (generate series + future,
 * run every method, score point error / coverage / width against the
 * realized future).  Replication n draws everything from substream n of
 * the root seed, so results are independent of the worker count and
 * reproducible from (config, seed) alone.
 */
inline MetricsTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.N < 1) throw ConfigError("replications must be at least 1");
  if (cfg.k_max < 1) throw ConfigError("horizon must be at least 1");
  if (cfg.methods.empty()) throw ConfigError("no methods given");
  if (cfg.M < 2) throw ConfigError("paths must be at least 2");

  const RngStream root(cfg.seed);
  std::vector<std::vector<detail::MethodRep>> reps(cfg.N);
  std::vector<std::vector<double>> futures(cfg.N);

  parallel_for(cfg.N, cfg.threads, [&](std::size_t n) {
    const RngStream rep_stream = root.substream(n);
    // The future draw must happen inside the replication body so a worker
    // failure cannot shift another replication's stream.
    const auto data = generate_series_with_future(cfg.dgp, cfg.T, cfg.k_max,
                                                  rep_stream.substream(0));
    futures[n] = data.future;
    reps[n] = detail::run_replication(cfg, rep_stream);
  });

  MetricsTable t;
  t.dgp = cfg.dgp.name;
  t.seed = cfg.seed;
  t.replications = cfg.N;
  t.horizons = cfg.k_max;
  for (const auto& m : cfg.methods) t.methods.push_back(m.label);
  t.cells.resize(cfg.methods.size() * cfg.k_max);

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (std::size_t j = 1; j <= cfg.k_max; ++j) {
      double sq = 0.0, hits = 0.0, width = 0.0;
      std::uint64_t done = 0;
      for (std::size_t n = 0; n < cfg.N; ++n) {
        const auto& rep = reps[n][mi];
        if (!rep.ok) continue;
        ++done;
        const double truth = futures[n][j - 1];
        const double d = truth - rep.points[j - 1];
        sq += d * d;
        hits += (truth >= rep.lowers[j - 1] && truth <= rep.uppers[j - 1]) ? 1.0 : 0.0;
        width += rep.uppers[j - 1] - rep.lowers[j - 1];
      }
      auto& c = t.cell(mi, j);
      c.completed = done;
      if (done > 0) {
        c.mspe = sq / static_cast<double>(done);
        c.cvr = hits / static_cast<double>(done);
        c.len = width / static_cast<double>(done);
      }
    }
    std::uint64_t done = 0;
    for (std::size_t n = 0; n < cfg.N; ++n) {
      const auto& rep = reps[n][mi];
      if (rep.ok) {
        ++done;
        t.guard_events += rep.guards;
      }
    }
    t.failures += cfg.N - done;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Named experiment presets.  The plain names run at a scale a workstation can
// finish; the "-paper" suffix raises the replication count to 5000.

namespace detail {

inline ExperimentConfig preset_base(const std::string& name, const std::string& dgp,
                                    std::size_t T, std::vector<std::string> labels) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.dgp = dgp_preset(dgp);
  cfg.T = T;
  cfg.methods = parse_methods(labels);
  return cfg;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  std::vector<std::string> base = {
      "table1-T100", "table1-T200", "table2-T100", "table2-T200",
      "table3-T100", "table3-T200", "table4-T50",  "table4-T100",
      "table4-T200", "table5-T50",  "table5-T100", "table5-T200",
      "table6-T50",  "table6-T500", "table7-T50",
  };
  std::vector<std::string> out;
  for (const auto& n : base) {
    out.push_back(n);
    out.push_back(n + "-paper");
  }
  return out;
}

inline ExperimentConfig preset(const std::string& name) {
  std::string base = name;
  bool paper = false;
  constexpr const char* kSuffix = "-paper";
  if (base.size() > 6 && base.substr(base.size() - 6) == kSuffix) {
    base = base.substr(0, base.size() - 6);
    paper = true;
  }

  const std::vector<std::string> point_methods = {
      "L2-Bootstrap", "L1-Bootstrap", "L2-Oracle", "L1-Oracle"};
  const std::vector<std::string> qpi_ppi_u = {
      "QPI-f",      "QPI-p",      "QPI-f-u",    "QPI-p-u",
      "L2-PPI-f-u", "L2-PPI-p-u", "L1-PPI-f-u", "L1-PPI-p-u", "SPI"};
  const std::vector<std::string> qpi_ppi_opv = {
      "QPI-f",        "QPI-p",        "QPI-f-u",      "QPI-p-u",
      "L2-PPI-f-opv", "L2-PPI-p-opv", "L1-PPI-f-opv", "L1-PPI-p-opv", "SPI"};
  const std::vector<std::string> ppi_u_vs_o = {
      "L2-PPI-f-u", "L2-PPI-p-u", "L2-PPI-f-o", "L2-PPI-p-o",
      "L1-PPI-f-u", "L1-PPI-p-u", "L1-PPI-f-o", "L1-PPI-p-o", "SPI"};
  const std::vector<std::string> ppi_u_vs_opv = {
      "L2-PPI-f-u", "L2-PPI-p-u", "L2-PPI-f-opv", "L2-PPI-p-opv",
      "L1-PPI-f-u", "L1-PPI-p-u", "L1-PPI-f-opv", "L1-PPI-p-opv", "SPI"};

  ExperimentConfig cfg;
  if (base == "table1-T100") cfg = detail::preset_base(name, "model1-normal", 100, point_methods);
  else if (base == "table1-T200") cfg = detail::preset_base(name, "model1-normal", 200, point_methods);
  else if (base == "table2-T100") cfg = detail::preset_base(name, "model1-chisq", 100, point_methods);
  else if (base == "table2-T200") cfg = detail::preset_base(name, "model1-chisq", 200, point_methods);
  else if (base == "table3-T100") cfg = detail::preset_base(name, "model2-normal", 100, point_methods);
  else if (base == "table3-T200") cfg = detail::preset_base(name, "model2-normal", 200, point_methods);
  else if (base == "table4-T50") cfg = detail::preset_base(name, "model1-normal", 50, qpi_ppi_u);
  else if (base == "table4-T100") cfg = detail::preset_base(name, "model1-normal", 100, qpi_ppi_u);
  else if (base == "table4-T200") cfg = detail::preset_base(name, "model1-normal", 200, qpi_ppi_u);
  else if (base == "table5-T50") cfg = detail::preset_base(name, "model2-normal", 50, qpi_ppi_opv);
  else if (base == "table5-T100") cfg = detail::preset_base(name, "model2-normal", 100, qpi_ppi_opv);
  else if (base == "table5-T200") cfg = detail::preset_base(name, "model2-normal", 200, qpi_ppi_opv);
  else if (base == "table6-T50") cfg = detail::preset_base(name, "model1-normal", 50, ppi_u_vs_o);
  else if (base == "table6-T500") cfg = detail::preset_base(name, "model1-normal", 500, ppi_u_vs_o);
  else if (base == "table7-T50") cfg = detail::preset_base(name, "model2-normal", 50, ppi_u_vs_opv);
  else throw ConfigError("unknown preset: " + name);

  const bool interval_study = base.substr(0, 6) != "table1" &&
                              base.substr(0, 6) != "table2" &&
                              base.substr(0, 6) != "table3";
  if (interval_study) {
    cfg.M = 500;          // paths behind each quantile interval
    cfg.inner_paths = 100;  // paths inside each bootstrap replicate
    cfg.B = 500;
  }
  if (paper) cfg.N = 5000;
  return cfg;
}

/**
 * Build a config from a JSON object.  Recognized keys: dgp (preset name or
 * {"model": "model1"|"model2", "innovation": "normal"|"chisq"|"two-point",
 * "burn_in": int}), T, N, M, B, inner_paths, k_max, alpha, methods (array of
 * descriptors), kernel ("epanechnikov"|"gaussian"), seed, threads,
 * smoothing_sd, retry_budget, name.  Unknown keys are rejected so typos
 * surface instead of silently falling back to defaults.
 */
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "name", "dgp", "T", "N", "M", "B", "inner_paths", "k_max", "alpha",
      "methods", "kernel", "seed", "threads", "smoothing_sd", "retry_budget"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == it.key();
    if (!ok) throw ConfigError("unknown config key: " + it.key());
  }

  ExperimentConfig cfg;
  try {
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    if (j.contains("dgp")) {
      const auto& d = j.at("dgp");
      if (d.is_string()) {
        cfg.dgp = dgp_preset(d.get<std::string>());
      } else {
        const std::string model = d.at("model").get<std::string>();
        const std::string innov = d.value("innovation", std::string("normal"));
        std::string preset_name;
        if (model == "model1" && innov == "normal") preset_name = "model1-normal";
        else if (model == "model1" && innov == "chisq") preset_name = "model1-chisq";
        else if (model == "model2" && innov == "normal") preset_name = "model2-normal";
        else throw ConfigError("unsupported dgp combination: " + model + "/" + innov);
        cfg.dgp = dgp_preset(preset_name);
        if (d.contains("burn_in")) cfg.dgp.burn_in = d.at("burn_in").get<std::size_t>();
      }
    } else {
      cfg.dgp = dgp_preset("model1-normal");
    }
    if (j.contains("T")) cfg.T = j.at("T").get<std::size_t>();
    if (j.contains("N")) cfg.N = j.at("N").get<std::size_t>();
    if (j.contains("M")) cfg.M = j.at("M").get<std::size_t>();
    if (j.contains("B")) cfg.B = j.at("B").get<std::size_t>();
    if (j.contains("inner_paths")) cfg.inner_paths = j.at("inner_paths").get<std::size_t>();
    if (j.contains("k_max")) cfg.k_max = j.at("k_max").get<std::size_t>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("methods"))
      cfg.methods = parse_methods(j.at("methods").get<std::vector<std::string>>());
    if (j.contains("kernel")) {
      const std::string k = j.at("kernel").get<std::string>();
      if (k == "epanechnikov") cfg.kernel.family = KernelFamily::epanechnikov;
      else if (k == "gaussian") cfg.kernel.family = KernelFamily::gaussian;
      else throw ConfigError("unknown kernel: " + k);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    if (j.contains("smoothing_sd")) cfg.smoothing_sd = j.at("smoothing_sd").get<double>();
    if (j.contains("retry_budget")) cfg.retry_budget = j.at("retry_budget").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (cfg.methods.empty())
    cfg.methods = parse_methods({"L2-Bootstrap", "L1-Bootstrap"});
  return cfg;
}

}  // namespace npboot
