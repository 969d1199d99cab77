#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specband/flow.hpp"
#include "specband/kdv.hpp"
#include "specband/weyl.hpp"

namespace specband {

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  int count = 101;
};

struct SeedSpec {
  std::string kind = "diagonal";  // "diagonal" | "explicit"
  std::vector<std::vector<double>> placement;  // per gap, m reals
  std::vector<Matrix> coefficients;            // ascending, for "explicit"
};

struct RunConfig {
  std::vector<double> edges;
  int m = 1;
  SeedSpec seed;
  std::vector<int> epsilons;  // empty -> all +1
  double x0 = 0.0;
  GridSpec x_grid;
  double h = 0.0;           // 0 -> 1e-3 * span
  std::vector<cplx> z_probes;
  std::vector<double> lambda_probes;
  double boundary_eps = 1e-6;
  int series_order = -1;    // -1 -> n + 3
  std::uint64_t rng_seed = 12345;
  std::map<std::string, double> tolerances;

  double tol(const std::string& name, double fallback) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string canonical_config_json(const RunConfig& cfg);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  std::vector<CheckResult> checks;
  std::map<std::string, double> metadata_values;  // informational numbers
  std::string config_hash;
  std::string version;
  double elapsed_seconds = 0.0;  // console only; never serialized
  bool all_pass() const;
  const CheckResult* find(const std::string& name) const;
};

enum class PipelineStage { BuildOnly, Full };

struct PipelineResult {
  RunReport report;
  std::optional<OperatorData> operator_data;
  std::optional<Trajectory> trajectory;
};

// Stage order: seed -> herglotz gate -> gap data -> quadruple -> Weyl and
// density spot checks -> propagation -> dynamical certificates -> series,
// trace, and stationary-hierarchy reports.  Errors carry the stage name.
PipelineResult run_pipeline(const RunConfig& cfg, PipelineStage stage = PipelineStage::Full,
                            const std::set<std::string>& enabled_checks = {});

// Re-runs the residual checks against an already-propagated trajectory.
RunReport verify_trajectory(const RunConfig& cfg, const Trajectory& traj);

void save_trajectory(const std::string& path, const Trajectory& traj,
                     const BandStructure& bs);
struct LoadedTrajectory {
  Trajectory trajectory;
  std::vector<double> edges;
};
LoadedTrajectory load_trajectory(const std::string& path);

void save_report(const std::string& path, const RunReport& report);

// Writes report.json plus whatever the result carries: potential.csv and
// trajectory.json from the trajectory, density.csv from the operator data.
void export_artifacts(const std::string& dir, const RunConfig& cfg,
                      const PipelineResult& result);

std::string library_version();

}  // namespace specband
