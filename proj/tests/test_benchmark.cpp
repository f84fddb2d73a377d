#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "npboot/benchmark.hpp"

using namespace npboot;

TEST_CASE("method descriptor grammar") {
  auto l2b = parse_method("L2-Bootstrap");
  CHECK(l2b.family == MethodFamily::point);
  CHECK(l2b.loss == Loss::l2);
  CHECK(l2b.residuals == ResidualKind::fitted);
  CHECK(l2b.strategy == BandwidthStrategy::oversmooth);

  auto l1o = parse_method("L1-Oracle");
  CHECK(l1o.family == MethodFamily::oracle_point);
  CHECK(l1o.loss == Loss::l1);

  auto qf = parse_method("QPI-f");
  CHECK(qf.family == MethodFamily::qpi);
  CHECK(qf.residuals == ResidualKind::fitted);
  CHECK(qf.strategy == BandwidthStrategy::oversmooth);

  auto qpu = parse_method("QPI-p-u");
  CHECK(qpu.residuals == ResidualKind::predictive);
  CHECK(qpu.strategy == BandwidthStrategy::undersmooth);

  auto ppi = parse_method("L2-PPI-f-u");
  CHECK(ppi.family == MethodFamily::ppi);
  CHECK(ppi.loss == Loss::l2);
  CHECK(ppi.residuals == ResidualKind::fitted);
  CHECK(ppi.strategy == BandwidthStrategy::undersmooth);

  auto popv = parse_method("L1-PPI-p-opv");
  CHECK(popv.loss == Loss::l1);
  CHECK(popv.residuals == ResidualKind::predictive);
  CHECK(popv.strategy == BandwidthStrategy::optimal_variance);

  auto po = parse_method("L2-PPI-p-o");
  CHECK(po.strategy == BandwidthStrategy::oversmooth);

  auto spi = parse_method("SPI");
  CHECK(spi.family == MethodFamily::spi);

  CHECK(parse_method("QPI-f").label == "QPI-f");

  for (const char* bad : {"", "L3-Bootstrap", "QPI", "QPI-x", "QPI-f-u-u", "L2-PPI",
                          "L2-PPI-f-q", "L2-Bootstrap-u", "Bootstrap", "spi"})
    CHECK_THROWS_AS(parse_method(bad), ConfigError);
}

TEST_CASE("zero-noise process scores perfectly at N=1") {
  DGPSpec still;
  still.name = "still";
  still.mean = [](double) { return 0.25; };
  still.sd = [](double) { return 0.0; };
  still.innovation = InnovationKind::custom;
  still.custom_innovation = [](Xoshiro256&) { return 0.0; };

  ExperimentConfig cfg;
  cfg.dgp = still;
  cfg.T = 30;
  cfg.N = 1;
  cfg.M = 50;
  cfg.B = 50;
  cfg.k_max = 3;
  cfg.seed = 11;
  cfg.methods = parse_methods({"L2-Bootstrap", "QPI-f", "L2-PPI-f-u"});

  const auto t = run_experiment(cfg);
  REQUIRE(t.methods.size() == 3);
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    for (std::size_t j = 1; j <= 3; ++j) {
      const auto& c = t.cell(m, j);
      CHECK(c.completed == 1);
      CHECK(c.mspe == 0.0);
      CHECK(c.cvr == 1.0);
      CHECK(c.len == 0.0);
    }
  }
  CHECK(t.failures == 0);
}

TEST_CASE("experiment is bit-identical across worker counts") {
  ExperimentConfig cfg;
  cfg.dgp = dgp_preset("model1-normal");
  cfg.T = 30;
  cfg.N = 6;
  cfg.M = 50;
  cfg.B = 50;
  cfg.inner_paths = 20;
  cfg.k_max = 2;
  cfg.seed = 314159;
  cfg.methods = parse_methods({"L2-Bootstrap", "QPI-f", "L2-PPI-f-u", "SPI"});

  cfg.threads = 1;
  const auto serial = emit_table(run_experiment(cfg), TableFormat::json);
  cfg.threads = 8;
  const auto parallel = emit_table(run_experiment(cfg), TableFormat::json);
  CHECK(serial == parallel);
}

TEST_CASE("oracle difficulty grows with the horizon") {
  // Step-1 oracle error must not exceed step-2 beyond Monte-Carlo slack.
  for (const char* name : {"model1-normal", "model2-normal"}) {
    ExperimentConfig cfg;
    cfg.dgp = dgp_preset(name);
    cfg.T = 50;
    cfg.N = 2000;
    cfg.M = 300;
    cfg.k_max = 2;
    cfg.seed = 2718;
    cfg.methods = parse_methods({"L2-Oracle"});
    const auto t = run_experiment(cfg);
    CHECK(t.cell(0, 1).mspe <= 1.05 * t.cell(0, 2).mspe);
  }
}

TEST_CASE("failures are counted per method, not fatal") {
  // T=15 supports the point methods (needs 10 observations) but not the
  // calibrated interval (needs 20), so the PPI column alone reports zero
  // completions.
  ExperimentConfig cfg;
  cfg.dgp = dgp_preset("model1-normal");
  cfg.T = 14;
  cfg.N = 3;
  cfg.M = 50;
  cfg.B = 50;
  cfg.k_max = 2;
  cfg.seed = 5;
  cfg.methods = parse_methods({"L2-Bootstrap", "L2-PPI-f-u"});
  const auto t = run_experiment(cfg);
  CHECK(t.cell(0, 1).completed == 3);
  CHECK(t.cell(1, 1).completed == 0);
  CHECK(std::isnan(t.cell(1, 1).mspe));
  CHECK(t.failures == 3);
  const auto md = emit_table(t, TableFormat::markdown);
  CHECK(md.find("L2-PPI-f-u \\*") != std::string::npos);
}

TEST_CASE("presets cover the published table configurations") {
  const auto names = preset_names();
  CHECK(names.size() == 30);
  for (const auto& n : names) {
    const auto cfg = preset(n);
    CHECK(cfg.N >= 1);
    CHECK(!cfg.methods.empty());
    CHECK(cfg.k_max == 5);
    CHECK(cfg.alpha == 0.05);
  }

  const auto t1 = preset("table1-T100");
  CHECK(t1.T == 100);
  CHECK(t1.N == 500);
  CHECK(t1.M == 1000);
  CHECK(t1.methods.size() == 4);
  CHECK(t1.dgp.name == "model1-normal");
  CHECK_FALSE(t1.inner_paths.has_value());

  const auto t2 = preset("table2-T200");
  CHECK(t2.dgp.innovation == InnovationKind::chisq3_centered);

  const auto t4 = preset("table4-T50");
  CHECK(t4.T == 50);
  CHECK(t4.M == 500);
  CHECK(t4.B == 500);
  REQUIRE(t4.inner_paths.has_value());
  CHECK(*t4.inner_paths == 100);
  CHECK(t4.methods.size() == 9);

  const auto t5 = preset("table5-T100");
  CHECK(t5.dgp.name == "model2-normal");
  bool has_opv = false;
  for (const auto& m : t5.methods)
    has_opv = has_opv || (m.family == MethodFamily::ppi &&
                          m.strategy == BandwidthStrategy::optimal_variance);
  CHECK(has_opv);

  const auto t6 = preset("table6-T500");
  CHECK(t6.T == 500);
  bool has_over = false, has_under = false;
  for (const auto& m : t6.methods) {
    if (m.family != MethodFamily::ppi) continue;
    has_over = has_over || m.strategy == BandwidthStrategy::oversmooth;
    has_under = has_under || m.strategy == BandwidthStrategy::undersmooth;
  }
  CHECK(has_over);
  CHECK(has_under);

  const auto paper = preset("table4-T100-paper");
  CHECK(paper.N == 5000);
  CHECK(paper.T == 100);

  CHECK_THROWS_AS(preset("table99-T9"), ConfigError);
}

TEST_CASE("config files round through JSON") {
  const auto j = nlohmann::json::parse(R"({
    "dgp": {"model": "model2", "innovation": "normal", "burn_in": 37},
    "T": 64, "N": 12, "M": 128, "B": 75, "inner_paths": 16,
    "k_max": 3, "alpha": 0.1,
    "methods": ["QPI-f", "L2-PPI-p-u"],
    "kernel": "gaussian", "seed": 99, "threads": 4,
    "smoothing_sd": 0.02, "retry_budget": 5
  })");
  const auto cfg = config_from_json(j);
  CHECK(cfg.dgp.name == "model2-normal");
  CHECK(cfg.dgp.burn_in == 37);
  CHECK(cfg.T == 64);
  CHECK(cfg.N == 12);
  CHECK(cfg.M == 128);
  CHECK(cfg.B == 75);
  REQUIRE(cfg.inner_paths.has_value());
  CHECK(*cfg.inner_paths == 16);
  CHECK(cfg.k_max == 3);
  CHECK(cfg.alpha == 0.1);
  CHECK(cfg.methods.size() == 2);
  CHECK(cfg.methods[1].label == "L2-PPI-p-u");
  CHECK(cfg.kernel.family == KernelFamily::gaussian);
  CHECK(cfg.seed == 99);
  CHECK(cfg.threads == 4);
  CHECK(cfg.smoothing_sd == 0.02);
  CHECK(cfg.retry_budget == 5);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"TT": 10})")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"kernel": "box"})")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"T": "ten"})")),
                  ConfigError);

  // String dgp and defaults.
  const auto lean = config_from_json(nlohmann::json::parse(R"({"dgp": "model1-chisq"})"));
  CHECK(lean.dgp.innovation == InnovationKind::chisq3_centered);
  CHECK(lean.methods.size() == 2);  // default point methods
}

TEST_CASE("experiment validation") {
  ExperimentConfig cfg;
  cfg.dgp = dgp_preset("model1-normal");
  cfg.methods = parse_methods({"L2-Bootstrap"});
  cfg.N = 0;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  cfg.N = 1;
  cfg.k_max = 0;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  cfg.k_max = 1;
  cfg.methods.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  cfg.methods = parse_methods({"L2-Bootstrap"});
  cfg.M = 1;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("the table records the seed and configuration identity") {
  ExperimentConfig cfg;
  cfg.dgp = dgp_preset("model1-normal");
  cfg.T = 25;
  cfg.N = 2;
  cfg.M = 40;
  cfg.k_max = 1;
  cfg.seed = 777;
  cfg.methods = parse_methods({"SPI"});
  const auto t = run_experiment(cfg);
  CHECK(t.seed == 777);
  CHECK(t.dgp == "model1-normal");
  CHECK(t.replications == 2);
  CHECK(t.horizons == 1);
}
