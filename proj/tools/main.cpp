#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "specband/errors.hpp"
#include "specband/io.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalAbort = 3;

std::set<std::string> parse_checks(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

void print_report(const specband::RunReport& report, bool quiet) {
  if (quiet) return;
  for (const auto& c : report.checks) {
    std::printf("%-22s %s  residual %.3e  (tol %.3e)%s%s\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.residual, c.tolerance,
                c.detail.empty() ? "" : "  -- ", c.detail.c_str());
  }
  for (const auto& [k, v] : report.metadata_values) {
    std::printf("%-22s value %.6e\n", k.c_str(), v);
  }
  std::printf("config %s  version %s  elapsed %.2fs  => %s\n", report.config_hash.c_str(),
              report.version.c_str(), report.elapsed_seconds,
              report.all_pass() ? "PASS" : "FAIL");
}

int run(const std::string& mode, const std::string& config_path, const std::string& out_dir,
        const std::string& checks, double h_override, bool quiet) {
  specband::RunConfig cfg;
  try {
    cfg = specband::load_config(config_path);
    if (h_override > 0.0) cfg.h = h_override;
  } catch (const specband::Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  }

  const std::set<std::string> enabled = parse_checks(checks);
  try {
    if (mode == "build" || mode == "flow") {
      const auto stage = (mode == "build") ? specband::PipelineStage::BuildOnly
                                           : specband::PipelineStage::Full;
      const specband::PipelineResult result = specband::run_pipeline(cfg, stage, enabled);
      print_report(result.report, quiet);
      if (!out_dir.empty()) specband::export_artifacts(out_dir, cfg, result);
      return result.report.all_pass() ? kExitPass : kExitCheckFailure;
    }
    if (mode == "verify" || mode == "export") {
      if (out_dir.empty()) {
        std::fprintf(stderr, "config error: %s needs --out pointing at the artifact dir\n",
                     mode.c_str());
        return kExitConfigError;
      }
      const auto loaded = specband::load_trajectory(out_dir + "/trajectory.json");
      if (loaded.edges != cfg.edges) {
        std::fprintf(stderr, "config error: trajectory dump was produced for different edges\n");
        return kExitConfigError;
      }
      if (mode == "verify") {
        const specband::RunReport report = specband::verify_trajectory(cfg, loaded.trajectory);
        print_report(report, quiet);
        return report.all_pass() ? kExitPass : kExitCheckFailure;
      }
      // export: rebuild the x0 data for the density table, reuse the dump.
      specband::PipelineResult result =
          specband::run_pipeline(cfg, specband::PipelineStage::BuildOnly, enabled);
      result.trajectory = loaded.trajectory;
      specband::export_artifacts(out_dir, cfg, result);
      print_report(result.report, quiet);
      return result.report.all_pass() ? kExitPass : kExitCheckFailure;
    }
  } catch (const specband::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const specband::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const specband::DriftExceededError& e) {
    std::fprintf(stderr, "numerical abort: %s (%zu nodes completed)\n", e.what(),
                 e.partial_trajectory.states.size());
    return kExitNumericalAbort;
  } catch (const specband::Error& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return kExitNumericalAbort;
  }
  std::fprintf(stderr, "unknown mode %s\n", mode.c_str());
  return kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-band matrix potential construction and certification"};
  app.set_help_flag("--help", "print help and exit");  // frees --h for the step size
  app.require_subcommand(1);

  std::string config_path, out_dir, checks;
  double h_override = 0.0;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->set_help_flag("--help", "print help and exit");
    cmd->add_option("--config", config_path, "configuration file (JSON)")->required();
    cmd->add_option("--out", out_dir, "artifact directory");
    cmd->add_option("--checks", checks, "comma-separated list of checks to enable");
    cmd->add_option("--h", h_override, "override the integrator step");
    cmd->add_flag("--quiet", quiet, "suppress the console report");
  };

  add_common(app.add_subcommand("build", "construct and verify at x0 only"));
  add_common(app.add_subcommand("flow", "full pipeline with propagation"));
  add_common(app.add_subcommand("verify", "re-check a dumped trajectory"));
  add_common(app.add_subcommand("export", "rewrite tables from a dumped trajectory"));

  CLI11_PARSE(app, argc, argv);

  const std::string mode = app.get_subcommands().front()->get_name();
  return run(mode, config_path, out_dir, checks, h_override, quiet);
}
