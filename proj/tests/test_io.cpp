#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "specband/errors.hpp"
#include "specband/io.hpp"
#include "test_helpers.hpp"

using namespace specband;

namespace {

const char* kCanonicalConfig = R"({
  "edges": [0.0, 1.0, 2.0],
  "m": 1,
  "seed": {"kind": "diagonal", "placement": [[1.5]]},
  "x0": 0.0,
  "x_grid": {"start": 0.0, "stop": 1.0, "count": 51},
  "h": 2e-3,
  "lambda_probes": [0.5, 3.0, 1.5],
  "rng_seed": 42
})";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  const std::string d = std::filesystem::temp_directory_path() / ("specband_test_" + tag);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("config parsing, defaults, and invariants") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  CHECK(cfg.edges.size() == 3);
  CHECK(cfg.m == 1);
  CHECK(cfg.seed.kind == "diagonal");
  CHECK(cfg.x_grid.count == 51);
  CHECK(cfg.rng_seed == 42);

  // defaults fill in when x_grid is missing
  const RunConfig defaults = parse_config(
      R"({"edges": [0, 1, 2], "m": 1, "seed": {"kind": "diagonal", "placement": [[1.5]]}})");
  CHECK(defaults.x_grid.count == 101);
  CHECK(defaults.x_grid.stop == doctest::Approx(1.0));
  CHECK(defaults.h == 0.0);  // resolved to 1e-3 * span inside the pipeline

  CHECK_THROWS_AS(parse_config(R"({"edges": [0, 1], "m": 1,
      "seed": {"kind": "diagonal", "placement": [[0.5]]}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"m": 1, "seed": {"kind": "diagonal"}})"), ValidationError);
  CHECK_THROWS_AS(parse_config("{not json"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"edges": [0,1,2], "m": 1,
      "seed": {"kind": "diagonal", "placement": [[1.5]]},
      "tolerances": {"trace": -1.0}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"edges": [0,1,2], "m": 1,
      "seed": {"kind": "diagonal", "placement": [[1.5]]},
      "x_grid": {"start": 0, "stop": 1, "count": 3}})"), ValidationError);
}

TEST_CASE("full pipeline on the canonical configuration") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  const PipelineResult result = run_pipeline(cfg);
  for (const CheckResult& c : result.report.checks) {
    INFO(c.name, " residual ", c.residual, " tol ", c.tolerance, " :: ", c.detail);
    CHECK(c.pass);
  }
  CHECK(result.report.all_pass());
  REQUIRE(result.trajectory.has_value());
  CHECK(max_abs(result.trajectory->states.front().potential()) < 1e-10);
  // every advertised check ran
  for (const char* name :
       {"herglotz_seed", "dirichlet", "quadruple", "herglotz_positivity", "weyl_cross",
        "density", "stieltjes", "flow_drift", "riccati", "reflectionless", "lax", "trace",
        "skdv", "series"}) {
    CHECK(result.report.find(name) != nullptr);
  }
}

TEST_CASE("seed inside a band fails at the herglotz stage") {
  RunConfig cfg = parse_config(kCanonicalConfig);
  cfg.seed.placement = {{1.5}};
  // a band point is not a legal placement, so use an explicit seed
  cfg.seed.kind = "explicit";
  Matrix c0(1, 1);
  c0(0, 0) = -0.5;
  cfg.seed.coefficients = {c0, Matrix::Identity(1, 1)};
  const PipelineResult result = run_pipeline(cfg);
  CHECK_FALSE(result.report.all_pass());
  const CheckResult* h = result.report.find("herglotz_seed");
  REQUIRE(h != nullptr);
  CHECK_FALSE(h->pass);
  // the pipeline stops at the gate
  CHECK(result.report.checks.size() == 1);
  CHECK_FALSE(result.trajectory.has_value());
}

TEST_CASE("build stage stops before propagation") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  const PipelineResult result = run_pipeline(cfg, PipelineStage::BuildOnly);
  CHECK(result.report.all_pass());
  CHECK(result.operator_data.has_value());
  CHECK_FALSE(result.trajectory.has_value());
  CHECK(result.report.find("flow_drift") == nullptr);
}

TEST_CASE("check selection narrows the report") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  const PipelineResult result =
      run_pipeline(cfg, PipelineStage::Full, {"herglotz_seed", "flow_drift"});
  CHECK(result.report.checks.size() == 2);
  CHECK(result.report.all_pass());
}

TEST_CASE("determinism: identical configs give identical artifacts") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  const std::string d1 = temp_dir("det1");
  const std::string d2 = temp_dir("det2");
  export_artifacts(d1, cfg, run_pipeline(cfg));
  export_artifacts(d2, cfg, run_pipeline(cfg));
  CHECK(slurp(d1 + "/report.json") == slurp(d2 + "/report.json"));
  CHECK(slurp(d1 + "/trajectory.json") == slurp(d2 + "/trajectory.json"));
  CHECK(slurp(d1 + "/potential.csv") == slurp(d2 + "/potential.csv"));
  CHECK(slurp(d1 + "/density.csv") == slurp(d2 + "/density.csv"));
  CHECK(!slurp(d1 + "/report.json").empty());
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("trajectory round trip is exact") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  const PipelineResult result = run_pipeline(cfg);
  const std::string dir = temp_dir("roundtrip");
  const BandStructure bs(cfg.edges);
  save_trajectory(dir + "/t.json", *result.trajectory, bs);
  const LoadedTrajectory loaded = load_trajectory(dir + "/t.json");
  REQUIRE(loaded.trajectory.states.size() == result.trajectory->states.size());
  for (std::size_t i = 0; i < loaded.trajectory.states.size(); ++i) {
    const FlowState& a = result.trajectory->states[i];
    const FlowState& b = loaded.trajectory.states[i];
    CHECK(a.x == b.x);
    for (std::size_t k = 0; k < a.f.size(); ++k) CHECK(max_abs(Matrix(a.f[k] - b.f[k])) == 0.0);
    for (std::size_t k = 0; k < a.g1.size(); ++k) {
      CHECK(max_abs(Matrix(a.g1[k] - b.g1[k])) == 0.0);
      CHECK(max_abs(Matrix(a.g2[k] - b.g2[k])) == 0.0);
    }
    for (std::size_t k = 0; k < a.h.size(); ++k) CHECK(max_abs(Matrix(a.h[k] - b.h[k])) == 0.0);
  }
  // a verification pass over the loaded dump agrees
  const RunReport vr = verify_trajectory(cfg, loaded.trajectory);
  CHECK(vr.all_pass());
  std::filesystem::remove_all(dir);
}

TEST_CASE("exported tables carry the documented headers") {
  const RunConfig cfg = parse_config(kCanonicalConfig);
  const std::string dir = temp_dir("tables");
  export_artifacts(dir, cfg, run_pipeline(cfg));

  const std::string pot = slurp(dir + "/potential.csv");
  CHECK(pot.rfind("x, re_Q_11, im_Q_11\n", 0) == 0);
  // first row: x0 with Q = 0
  std::istringstream lines(pot);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(row.rfind("0, ", 0) == 0);

  const std::string den = slurp(dir + "/density.csv");
  CHECK(den.rfind("lambda, inside", 0) == 0);
  // the gap probe is a flagged zero row
  bool found_gap_row = false;
  std::istringstream dlines(den);
  std::getline(dlines, header);
  while (std::getline(dlines, row)) {
    if (row.rfind("1.5, 0", 0) == 0) found_gap_row = true;
  }
  CHECK(found_gap_row);
  std::filesystem::remove_all(dir);
}

TEST_CASE("diagonal two-channel configuration passes end to end") {
  RunConfig cfg = parse_config(kCanonicalConfig);
  cfg.m = 2;
  cfg.seed.placement = {{1.25, 1.75}};
  const PipelineResult result = run_pipeline(cfg);
  for (const CheckResult& c : result.report.checks) {
    INFO(c.name, " residual ", c.residual, " :: ", c.detail);
    CHECK(c.pass);
  }
  CHECK(result.report.metadata_values.count("nonabelian_probe") == 1);
  CHECK(result.report.metadata_values.at("nonabelian_probe") <= 1e-12);
}

TEST_CASE("random scalar and two-channel instances pass the full pipeline") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gap(0.3, 2.0);
  std::uniform_real_distribution<double> pos(0.15, 0.85);
  for (int trial = 0; trial < 6; ++trial) {
    RunConfig cfg;
    const int n = 1 + static_cast<int>(rng() % 2);
    double e = -3.0 + 2.0 * pos(rng);
    for (int l = 0; l < 2 * n + 1; ++l) {
      cfg.edges.push_back(e);
      e += gap(rng);
    }
    cfg.m = 1;
    cfg.seed.kind = "diagonal";
    for (int j = 1; j <= n; ++j) {
      const double lo = cfg.edges[static_cast<std::size_t>(2 * j - 1)];
      const double hi = cfg.edges[static_cast<std::size_t>(2 * j)];
      cfg.seed.placement.push_back({lo + pos(rng) * (hi - lo)});
    }
    cfg.x_grid = {0.0, 1.0, 26};
    cfg.h = 1e-3;
    const PipelineResult r = run_pipeline(cfg);
    for (const CheckResult& c : r.report.checks) {
      INFO("trial ", trial, " n ", n, ": ", c.name, " residual ", c.residual, " :: ", c.detail);
      CHECK(c.pass);
    }
  }

  for (int trial = 0; trial < 4; ++trial) {
    RunConfig cfg;
    cfg.edges = {0.0, 1.0, 2.0 + pos(rng)};
    cfg.m = 2;
    cfg.seed.kind = "diagonal";
    const double lo = 1.0, hi = cfg.edges[2];
    double a = lo + pos(rng) * (hi - lo), b = lo + pos(rng) * (hi - lo);
    if (std::abs(a - b) < 0.05) b = a + 0.2 * (hi - a);
    cfg.seed.placement = {{a, b}};
    cfg.x_grid = {0.0, 1.0, 26};
    cfg.h = 1e-3;
    const PipelineResult r = run_pipeline(cfg);
    for (const CheckResult& c : r.report.checks) {
      INFO("m=2 trial ", trial, ": ", c.name, " residual ", c.residual, " :: ", c.detail);
      CHECK(c.pass);
    }
  }
}

}  // TEST_SUITE
