#include "specband/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specband/errors.hpp"

namespace specband {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.2.0";
constexpr int kSchemaVersion = 1;

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx json_to_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(where + ": complex values are [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(complex_to_json(a(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ValidationError(where + ": matrix must be a row array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix a(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) {
      throw ValidationError(where + ": ragged matrix rows");
    }
    for (int c = 0; c < cols; ++c) {
      a(r, c) = json_to_complex(j[r][c], where);
    }
  }
  return a;
}

std::vector<double> linspace(const GridSpec& g) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(g.count));
  for (int i = 0; i < g.count; ++i) {
    out.push_back(g.start + (g.stop - g.start) * static_cast<double>(i) /
                                static_cast<double>(g.count - 1));
  }
  return out;
}

Trajectory subsample(const Trajectory& traj, int stride) {
  Trajectory out;
  out.h = traj.h;
  for (std::size_t i = 0; i < traj.states.size(); i += static_cast<std::size_t>(stride)) {
    out.grid.push_back(traj.grid[i]);
    out.states.push_back(traj.states[i]);
    out.drift.push_back(traj.drift[i]);
  }
  return out;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string library_version() { return kVersion; }

double RunConfig::tol(const std::string& name, double fallback) const {
  auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config parse error: ") + e.what());
  }

  RunConfig cfg;
  try {
    if (!j.contains("edges")) throw ValidationError("config: missing 'edges'");
    cfg.edges = j.at("edges").get<std::vector<double>>();
    cfg.m = j.value("m", 1);
    if (cfg.m < 1) throw ValidationError("config: m must be >= 1");

    if (j.contains("seed")) {
      const json& s = j.at("seed");
      cfg.seed.kind = s.value("kind", "diagonal");
      if (cfg.seed.kind == "diagonal") {
        if (!s.contains("placement")) throw ValidationError("config: diagonal seed needs 'placement'");
        cfg.seed.placement = s.at("placement").get<std::vector<std::vector<double>>>();
      } else if (cfg.seed.kind == "explicit") {
        if (!s.contains("coefficients")) {
          throw ValidationError("config: explicit seed needs 'coefficients'");
        }
        for (const json& mj : s.at("coefficients")) {
          cfg.seed.coefficients.push_back(json_to_matrix(mj, "seed.coefficients"));
        }
      } else {
        throw ValidationError("config: seed.kind must be 'diagonal' or 'explicit'");
      }
    } else {
      throw ValidationError("config: missing 'seed'");
    }

    if (j.contains("epsilons")) cfg.epsilons = j.at("epsilons").get<std::vector<int>>();
    for (int e : cfg.epsilons) {
      if (e != 1 && e != -1) throw ValidationError("config: epsilons must be +1 or -1");
    }

    cfg.x0 = j.value("x0", 0.0);
    if (j.contains("x_grid")) {
      const json& g = j.at("x_grid");
      cfg.x_grid.start = g.value("start", cfg.x0);
      cfg.x_grid.stop = g.value("stop", cfg.x0 + 1.0);
      cfg.x_grid.count = g.value("count", 101);
    } else {
      cfg.x_grid = GridSpec{cfg.x0, cfg.x0 + 1.0, 101};
    }
    if (cfg.x_grid.count < 5) throw ValidationError("config: x_grid.count must be >= 5");
    if (std::abs(cfg.x_grid.start - cfg.x0) > 1e-12) {
      throw ValidationError("config: x_grid.start must equal x0");
    }

    cfg.h = j.value("h", 0.0);
    if (cfg.h < 0.0) throw ValidationError("config: h must be positive");
    cfg.boundary_eps = j.value("boundary_epsilon", 1e-6);
    if (cfg.boundary_eps <= 0.0) throw ValidationError("config: boundary_epsilon must be positive");
    cfg.series_order = j.value("K", -1);
    cfg.rng_seed = j.value("rng_seed", static_cast<std::uint64_t>(12345));

    if (j.contains("z_probes")) {
      for (const json& zj : j.at("z_probes")) {
        cfg.z_probes.push_back(json_to_complex(zj, "z_probes"));
      }
    }
    if (j.contains("lambda_probes")) {
      cfg.lambda_probes = j.at("lambda_probes").get<std::vector<double>>();
    }
    if (j.contains("tolerances")) {
      for (auto it = j.at("tolerances").begin(); it != j.at("tolerances").end(); ++it) {
        const double v = it.value().get<double>();
        if (v <= 0.0) throw ValidationError("config: tolerance '" + it.key() + "' must be positive");
        cfg.tolerances[it.key()] = v;
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field error: ") + e.what());
  }

  // Edge invariants are enforced by the band structure itself.
  try {
    BandStructure probe(cfg.edges);
    if (cfg.seed.kind == "diagonal" &&
        static_cast<int>(cfg.seed.placement.size()) != probe.n()) {
      throw ValidationError("config: placement needs one list per interior gap");
    }
  } catch (const EvenEdgeCount& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const NonMonotoneEdges& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string canonical_config_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["edges"] = cfg.edges;
  j["m"] = cfg.m;
  j["seed"]["kind"] = cfg.seed.kind;
  if (cfg.seed.kind == "diagonal") {
    j["seed"]["placement"] = cfg.seed.placement;
  } else {
    json cs = json::array();
    for (const Matrix& a : cfg.seed.coefficients) cs.push_back(matrix_to_json(a));
    j["seed"]["coefficients"] = cs;
  }
  j["epsilons"] = cfg.epsilons;
  j["x0"] = cfg.x0;
  j["x_grid"] = {{"start", cfg.x_grid.start}, {"stop", cfg.x_grid.stop}, {"count", cfg.x_grid.count}};
  j["h"] = cfg.h;
  json zp = json::array();
  for (cplx z : cfg.z_probes) zp.push_back(complex_to_json(z));
  j["z_probes"] = zp;
  j["lambda_probes"] = cfg.lambda_probes;
  j["boundary_epsilon"] = cfg.boundary_eps;
  j["K"] = cfg.series_order;
  j["rng_seed"] = cfg.rng_seed;
  j["tolerances"] = cfg.tolerances;
  return j.dump();
}

bool RunReport::all_pass() const {
  for (const CheckResult& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

const CheckResult* RunReport::find(const std::string& name) const {
  for (const CheckResult& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

struct CheckSink {
  RunReport* report;
  const std::set<std::string>* enabled;
  bool wants(const std::string& name) const {
    return enabled->empty() || enabled->count(name) > 0;
  }
  void add(const std::string& name, double residual, double tolerance, bool pass,
           std::string detail = {}) {
    if (!wants(name)) return;
    report->checks.push_back({name, residual, tolerance, pass, std::move(detail)});
  }
};

std::vector<double> default_lambda_probes(const BandStructure& bs) {
  std::vector<double> probes;
  for (int jj = 0; jj < bs.n(); ++jj) {
    auto [lo, hi] = bs.band(jj);
    probes.push_back(0.5 * (lo + hi));
  }
  probes.push_back(bs.edge(bs.num_edges() - 1) + 0.5 * bs.span());
  if (bs.n() >= 1) {
    auto [glo, ghi] = bs.gap(1);
    probes.push_back(0.5 * (glo + ghi));  // zero-density control row
  }
  return probes;
}

std::vector<cplx> offaxis_probes(const RunConfig& cfg, const BandStructure& bs) {
  std::vector<cplx> zs;
  for (cplx z : cfg.z_probes) {
    if (std::abs(z.imag()) > 0.0) zs.push_back(z);
  }
  if (zs.empty()) zs = default_z_samples(bs);
  return zs;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, PipelineStage stage,
                            const std::set<std::string>& enabled_checks) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult result;
  RunReport& report = result.report;
  report.version = kVersion;
  report.config_hash = fnv1a_hex(canonical_config_json(cfg));
  CheckSink sink{&report, &enabled_checks};

  auto stage_guard = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const DriftExceededError&) {
      throw;
    } catch (const Error& e) {
      throw Error(std::string("stage ") + name + ": " + e.what());
    }
  };

  const BandStructure bs(cfg.edges);
  const int n = bs.n();
  const int series_order = cfg.series_order < 0 ? n + 3 : cfg.series_order;
  const EdgeSeries es = edge_series(bs, std::max(series_order, n + 2));
  const double h = cfg.h > 0.0 ? cfg.h : 1e-3 * bs.span();
  const std::vector<cplx> z_probes = offaxis_probes(cfg, bs);
  const std::vector<double> lambda_probes =
      cfg.lambda_probes.empty() ? default_lambda_probes(bs) : cfg.lambda_probes;

  // --- seed ---
  MatrixPencil f = stage_guard("seed", [&] {
    if (cfg.seed.kind == "diagonal") return default_seed(bs, cfg.m, cfg.seed.placement);
    MatrixPencil p(cfg.seed.coefficients);
    if (p.dim() != cfg.m || p.degree() != n || !p.is_monic(1e-12)) {
      throw ValidationError("explicit seed must be monic degree n with dimension m");
    }
    return p;
  });

  // --- herglotz gate ---
  const double herglotz_tol = cfg.tol("herglotz_seed", 1e-10);
  const HerglotzSeedReport hrep = stage_guard("herglotz", [&] {
    return verify_herglotz_seed(f, bs, default_herglotz_samples(bs), herglotz_tol);
  });
  sink.add("herglotz_seed", std::max(0.0, -hrep.worst_imag_eig),
           herglotz_tol * std::max(1.0, f.coeff_scale()), hrep.pass,
           hrep.roots_in_gaps ? "roots confined to gap closures" : "roots escape the gaps");
  if (!hrep.pass) {
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;  // seed rejected; downstream stages would only cascade
  }

  // --- gap data ---
  const DirichletSet ds = stage_guard("dirichlet", [&] {
    return extract_dirichlet(f, bs, cfg.epsilons);
  });
  {
    const MatrixPencil fprime = f.derivative();
    double resid = 0.0;
    for (const DirichletDatum& d : ds.data) {
      const cplx sr = bs.eval_sqrt_r(cplx(d.mu, 0.0));
      const Matrix lhs = cplx(0.0, 1.0) * sr * d.gamma +
                         d.gamma * fprime.eval(cplx(d.mu, 0.0)) * d.gamma;
      resid = std::max(resid, max_abs(lhs));
    }
    // Pole-stripped reconstruction stays Herglotz.
    double recon_worst = 0.0;
    for (cplx z : default_herglotz_samples(bs)) {
      Matrix a = cplx(0.0, 1.0) * bs.eval_sqrt_r(z) * Matrix(f.eval(z).inverse());
      for (const DirichletDatum& d : ds.data) a += d.gamma / (z - d.mu);
      a -= ds.gamma0;
      recon_worst = std::max(recon_worst, std::max(0.0, -min_eigenvalue(imag_part(a))));
    }
    const double scale = std::max(1.0, f.coeff_scale());
    const double tol = cfg.tol("dirichlet", 1e-8) * scale;
    sink.add("dirichlet", std::max(resid, recon_worst), tol,
             std::max(resid, recon_worst) <= tol,
             "residue identity and pole-stripped positivity");
  }

  // --- quadruple ---
  OperatorData od = stage_guard("quadruple", [&] { return build_quadruple(f, ds, bs); });
  {
    const QuadrupleReport q = verify_quadruple(od, z_probes);
    const double tol = cfg.tol("quadruple", 1e-10);
    sink.add("quadruple", q.max_residual() / q.scale, tol, q.pass(tol),
             "pencil identities, coefficientwise and sampled");
  }

  // --- Weyl / density spot checks ---
  const WeylEvaluator ev(od);
  stage_guard("weyl", [&] {
    const double tol = cfg.tol("herglotz_positivity", 1e-10);
    double worst = 0.0;  // positivity deficit
    double cross = 0.0;
    const double c = 0.5 * (bs.edge(0) + bs.edge(bs.num_edges() - 1));
    const double s = bs.span();
    for (double re_off : {-1.0, -0.4, 0.0, 0.5, 1.1}) {
      for (double im_off : {0.1, 0.32, 1.0, 3.2, 10.0}) {
        const cplx z(c + re_off * s, im_off * s);
        const Matrix mp = ev.half_line(z, HalfLine::Plus);
        const Matrix mn = ev.half_line(z, HalfLine::Minus);
        worst = std::max(worst, -min_eigenvalue(imag_part(mp)) / ev.scale(z));
        worst = std::max(worst, -min_eigenvalue(imag_part(Matrix(-mn))) / ev.scale(z));
        cross = std::max(cross, ev.route_residual(z) / ev.scale(z));
      }
    }
    sink.add("herglotz_positivity", std::max(0.0, worst), tol, worst <= tol,
             "Im(+-M_pm) >= 0 on the 25-point grid");
    const double ctol = cfg.tol("weyl_cross", 1e-9);
    sink.add("weyl_cross", cross, ctol, cross <= ctol,
             "closed pencil form vs half-line block form");

    double density_worst = 0.0;
    for (double lam : lambda_probes) {
      const auto d = ev.spectral_density(lam);
      if (d.inside) density_worst = std::max(density_worst, -min_eigenvalue(d.value));
    }
    const double dtol = cfg.tol("density", 1e-10);
    sink.add("density", std::max(0.0, density_worst), dtol, density_worst <= dtol,
             "spectral density positive semidefinite at interior probes");

    double ratio_bad = 0.0;
    int measured = 0, floored = 0;
    std::string detail;
    for (double lam : lambda_probes) {
      if (!bs.in_band_interior(lam)) continue;
      const double r1 = ev.stieltjes_residual(lam, cfg.boundary_eps);
      const double r2 = ev.stieltjes_residual(lam, cfg.boundary_eps / 10.0);
      if (r1 <= 1e-12 * ev.scale(cplx(lam, 0.0))) {
        ++floored;  // already vanished faster than measurable
        continue;
      }
      ++measured;
      const double ratio = r1 / std::max(r2, 1e-300);
      detail += format_g17(ratio) + " ";
      // at-least-linear decay; real-coefficient instances decay quadratically
      if (ratio < cfg.tol("stieltjes_ratio_lo", 4.0)) {
        ratio_bad = std::max(ratio_bad, 1.0);
      }
    }
    if (measured == 0) detail = std::to_string(floored) + " probes below the residual floor";
    sink.add("stieltjes", ratio_bad, 0.5, ratio_bad < 0.5,
             "boundary-value residual decays at least linearly in eps; " + detail);
    return 0;
  });

  if (cfg.m >= 2) {
    const double c = 0.5 * (bs.edge(0) + bs.edge(bs.num_edges() - 1));
    report.metadata_values["nonabelian_probe"] =
        nonabelian_probe(f, cplx(c, bs.span()), cplx(c, 2.0 * bs.span()));
  }
  report.metadata_values["gamma0_norm"] = max_abs(ds.gamma0);

  if (stage == PipelineStage::BuildOnly) {
    result.operator_data = od;
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  // --- propagation ---
  const FlowState s0 = state_from_operator_data(od, cfg.x0);
  PropagationConfig pc;
  pc.h = h;
  pc.drift_abort_rel = cfg.tol("drift_abort", 1e-6);
  pc.drift_samples = z_probes;
  const std::vector<double> grid = linspace(cfg.x_grid);
  const Trajectory traj = stage_guard("propagate", [&] { return propagate(s0, grid, bs, pc); });

  const double flow_scale = invariant_residuals(s0, bs, z_probes).scale;
  {
    double max_drift = 0.0;
    for (double d : traj.drift) max_drift = std::max(max_drift, d);
    const double tol = cfg.tol("flow_drift", 1e-8);
    sink.add("flow_drift", max_drift / flow_scale, tol, max_drift <= tol * flow_scale,
             "conserved pencil identities along the trajectory");
  }

  const Trajectory coarse = subsample(traj, 2);

  // --- riccati ---
  stage_guard("riccati", [&] {
    const cplx z = z_probes.front();
    const double fine = riccati_residual(traj, bs, z).max_residual();
    const double coarse_res = riccati_residual(coarse, bs, z).max_residual();
    const double lo = cfg.tol("riccati_ratio_lo", 2.0);
    const double hi = cfg.tol("riccati_ratio_hi", 8.0);
    const double ratio = coarse_res / std::max(fine, 1e-300);
    const bool floored = fine <= 1e-10 * flow_scale;
    const bool pass = floored || (ratio >= lo && ratio <= hi);
    // report the deviation of the refinement ratio from order 2
    sink.add("riccati", floored ? 0.0 : std::abs(ratio - 4.0), hi - 4.0, pass,
             "residual " + format_g17(fine) + ", refinement ratio " + format_g17(ratio));
    return 0;
  });

  // --- reflectionless ---
  stage_guard("reflectionless", [&] {
    double lam = 0.0;
    bool found = false;
    for (double l : lambda_probes) {
      if (bs.in_band_interior(l)) {
        lam = l;
        found = true;
        break;
      }
    }
    if (!found) return 0;
    auto worst = [&](double eps) {
      double w = 0.0;
      for (double v : reflectionless_residual(traj, bs, lam, eps)) w = std::max(w, v);
      return w;
    };
    const double r1 = worst(cfg.boundary_eps);
    const double r2 = worst(cfg.boundary_eps / 10.0);
    const double ratio = r1 / std::max(r2, 1e-300);
    const bool pass = (r1 <= 1e-12 * flow_scale) ||
                      (ratio >= cfg.tol("reflectionless_ratio_lo", 4.0) &&
                       ratio <= cfg.tol("reflectionless_ratio_hi", 25.0));
    sink.add("reflectionless", r1, cfg.boundary_eps * 1e3, pass,
             "eps-linear matching across the band; ratio " + format_g17(ratio));
    return 0;
  });

  // --- lax ---
  stage_guard("lax", [&] {
    const double fine = lax_residual(traj, z_probes).max_residual();
    const double coarse_res = lax_residual(coarse, z_probes).max_residual();
    const double ratio = coarse_res / std::max(fine, 1e-300);
    const double hi = cfg.tol("lax_ratio_hi", 8.0);
    const bool floored = fine <= 1e-9 * flow_scale;
    const bool pass = floored || (ratio >= cfg.tol("lax_ratio_lo", 2.0) && ratio <= hi);
    sink.add("lax", floored ? 0.0 : std::abs(ratio - 4.0), hi - 4.0, pass,
             "residual " + format_g17(fine) + ", refinement ratio " + format_g17(ratio));
    return 0;
  });

  // --- trace formulas ---
  stage_guard("trace", [&] {
    const double tol = cfg.tol("trace", 1e-8);
    const double zone_tol = cfg.tol("zone_tol", 1e-8);
    double worst = 0.0, zone_margin = 0.0;
    for (const FlowState& s : traj.states) {
      const TraceReport tr = trace_formulas(s, bs, es);
      double local = std::max(tr.q_from_u, tr.q_from_v);
      for (double v : tr.f_resid) local = std::max(local, v);
      for (double v : tr.h_resid) local = std::max(local, v);
      worst = std::max(worst, local / tr.scale);
      zone_margin = std::max(zone_margin, tr.zone_margin);
    }
    const bool pass = worst <= tol && zone_margin <= zone_tol * std::max(1.0, bs.span());
    sink.add("trace", worst, tol, pass,
             "root sums vs series at every node; zone margin " + format_g17(zone_margin));
    return 0;
  });

  // --- stationary hierarchy ---
  stage_guard("skdv", [&] {
    const double fine = skdv_residual(traj, es).max_residual();
    const double coarse_res = skdv_residual(coarse, es).max_residual();
    const double ratio = coarse_res / std::max(fine, 1e-300);
    // the discretization floor scales with the grid spacing squared
    const double dx = traj.dx();
    const double tol =
        std::max(cfg.tol("skdv", 1e-5), cfg.tol("skdv_c", 50.0) * dx * dx) * flow_scale;
    const bool pass = fine <= tol && (fine <= 1e-12 * flow_scale ||
                                      (ratio >= cfg.tol("skdv_ratio_lo", 2.0) &&
                                       ratio <= cfg.tol("skdv_ratio_hi", 8.0)));
    sink.add("skdv", fine, tol, pass, "refinement ratio " + format_g17(ratio));
    return 0;
  });

  // --- series routes ---
  stage_guard("series", [&] {
    const double dx = traj.dx();
    std::vector<Matrix> q_grid;
    for (const FlowState& s : traj.states) q_grid.push_back(s.potential());
    const ExplicitSeries ex = explicit_low_order(q_grid, dx);
    const MExpansion me = m_expansion_recursion(q_grid, dx, 4);
    const auto rhat_m = rhat_from_m_expansion(me, 2);
    double worst = 0.0;
    for (int i = std::max(ex.lo, me.lo); i <= std::min(ex.hi, me.hi); ++i) {
      const InvariantSeries ps =
          series_from_state(traj.states[static_cast<std::size_t>(i)], es, 2);
      const std::size_t ui = static_cast<std::size_t>(i);
      worst = std::max(worst, max_abs(Matrix(ps.rhat[1] - ex.rhat1[ui])));
      worst = std::max(worst, max_abs(Matrix(ps.rhat[2] - ex.rhat2[ui])));
      worst = std::max(worst, max_abs(Matrix(ps.rhat[1] - rhat_m[1][ui])));
      worst = std::max(worst, max_abs(Matrix(ps.rhat[2] - rhat_m[2][ui])));
    }
    const double tol = (cfg.tol("series_c", 50.0) * dx * dx +
                        100.0 * cfg.tol("flow_drift", 1e-8)) * flow_scale;
    sink.add("series", worst, tol, worst <= tol,
             "pencil, differential-polynomial and expansion routes agree");
    return 0;
  });

  result.operator_data = od;
  result.trajectory = traj;
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

RunReport verify_trajectory(const RunConfig& cfg, const Trajectory& traj) {
  RunReport report;
  report.version = kVersion;
  report.config_hash = fnv1a_hex(canonical_config_json(cfg));
  const BandStructure bs(cfg.edges);
  const std::vector<cplx> z_probes = offaxis_probes(cfg, bs);
  const int n = bs.n();
  const EdgeSeries es = edge_series(bs, n + 3);

  const double scale = invariant_residuals(traj.states.front(), bs, z_probes).scale;
  double max_drift = 0.0;
  for (const FlowState& s : traj.states) {
    max_drift = std::max(max_drift, invariant_residuals(s, bs, z_probes).max_residual());
  }
  const double tol = cfg.tol("flow_drift", 1e-8);
  report.checks.push_back({"flow_drift", max_drift / scale, tol, max_drift <= tol * scale,
                           "recomputed invariant residuals on the loaded trajectory"});

  double trace_worst = 0.0;
  for (const FlowState& s : traj.states) {
    const TraceReport tr = trace_formulas(s, bs, es);
    double local = std::max(tr.q_from_u, tr.q_from_v);
    for (double v : tr.f_resid) local = std::max(local, v);
    for (double v : tr.h_resid) local = std::max(local, v);
    trace_worst = std::max(trace_worst, local / tr.scale);
  }
  const double trace_tol = cfg.tol("trace", 1e-8);
  report.checks.push_back({"trace", trace_worst, trace_tol, trace_worst <= trace_tol,
                           "recomputed trace identities"});
  return report;
}

void save_trajectory(const std::string& path, const Trajectory& traj, const BandStructure& bs) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["edges"] = bs.edges();
  j["h"] = traj.h;
  j["grid"] = traj.grid;
  j["drift"] = traj.drift;
  json states = json::array();
  for (const FlowState& s : traj.states) {
    json sj;
    sj["x"] = s.x;
    json fj = json::array(), g1j = json::array(), g2j = json::array(), hj = json::array();
    for (const Matrix& a : s.f) fj.push_back(matrix_to_json(a));
    for (const Matrix& a : s.g1) g1j.push_back(matrix_to_json(a));
    for (const Matrix& a : s.g2) g2j.push_back(matrix_to_json(a));
    for (const Matrix& a : s.h) hj.push_back(matrix_to_json(a));
    sj["f"] = std::move(fj);
    sj["g1"] = std::move(g1j);
    sj["g2"] = std::move(g2j);
    sj["h"] = std::move(hj);
    states.push_back(std::move(sj));
  }
  j["states"] = std::move(states);
  write_file(path, j.dump(2) + "\n");
}

LoadedTrajectory load_trajectory(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("trajectory parse error: ") + e.what());
  }
  LoadedTrajectory out;
  try {
    out.edges = j.at("edges").get<std::vector<double>>();
    out.trajectory.h = j.at("h").get<double>();
    out.trajectory.grid = j.at("grid").get<std::vector<double>>();
    out.trajectory.drift = j.at("drift").get<std::vector<double>>();
    for (const json& sj : j.at("states")) {
      FlowState s;
      s.x = sj.at("x").get<double>();
      for (const json& mj : sj.at("f")) s.f.push_back(json_to_matrix(mj, "states.f"));
      for (const json& mj : sj.at("g1")) s.g1.push_back(json_to_matrix(mj, "states.g1"));
      for (const json& mj : sj.at("g2")) s.g2.push_back(json_to_matrix(mj, "states.g2"));
      for (const json& mj : sj.at("h")) s.h.push_back(json_to_matrix(mj, "states.h"));
      out.trajectory.states.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("trajectory field error: ") + e.what());
  }
  return out;
}

void save_report(const std::string& path, const RunReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = report.version;
  j["config_hash"] = report.config_hash;
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass},
                      {"detail", c.detail}});
  }
  j["checks"] = std::move(checks);
  j["metadata"] = report.metadata_values;
  j["failures"] = [&] {
    int f = 0;
    for (const CheckResult& c : report.checks) {
      if (!c.pass) ++f;
    }
    return f;
  }();
  write_file(path, j.dump(2) + "\n");
}

void export_artifacts(const std::string& dir, const RunConfig& cfg,
                      const PipelineResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir);

  save_report(dir + "/report.json", result.report);

  const BandStructure bs(cfg.edges);

  if (result.trajectory) {
    const Trajectory& traj = *result.trajectory;
    save_trajectory(dir + "/trajectory.json", traj, bs);

    const int m = traj.states.front().m();
    std::ostringstream pot;
    pot << "x";
    for (int r = 1; r <= m; ++r) {
      for (int c = 1; c <= m; ++c) {
        pot << ", re_Q_" << r << c << ", im_Q_" << r << c;
      }
    }
    pot << "\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const Matrix q = traj.states[i].potential();
      pot << format_g17(traj.grid[i]);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          pot << ", " << format_g17(q(r, c).real()) << ", " << format_g17(q(r, c).imag());
        }
      }
      pot << "\n";
    }
    write_file(dir + "/potential.csv", pot.str());
  } else if (result.operator_data) {
    const FlowState s0 = state_from_operator_data(*result.operator_data, cfg.x0);
    const Matrix q = s0.potential();
    const int m = s0.m();
    std::ostringstream pot;
    pot << "x";
    for (int r = 1; r <= m; ++r) {
      for (int c = 1; c <= m; ++c) {
        pot << ", re_Q_" << r << c << ", im_Q_" << r << c;
      }
    }
    pot << "\n" << format_g17(cfg.x0);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        pot << ", " << format_g17(q(r, c).real()) << ", " << format_g17(q(r, c).imag());
      }
    }
    pot << "\n";
    write_file(dir + "/potential.csv", pot.str());
  }

  if (result.operator_data) {
    const WeylEvaluator ev(*result.operator_data);
    const int m2 = 2 * result.operator_data->m;
    const std::vector<double> probes =
        cfg.lambda_probes.empty() ? default_lambda_probes(bs) : cfg.lambda_probes;
    std::ostringstream den;
    den << "lambda, inside";
    for (int r = 1; r <= m2; ++r) {
      for (int c = 1; c <= m2; ++c) {
        den << ", re_D_" << r << c << ", im_D_" << r << c;
      }
    }
    den << "\n";
    for (double lam : probes) {
      const auto d = ev.spectral_density(lam);
      den << format_g17(lam) << ", " << (d.inside ? 1 : 0);
      for (int r = 0; r < m2; ++r) {
        for (int c = 0; c < m2; ++c) {
          den << ", " << format_g17(d.value(r, c).real()) << ", "
              << format_g17(d.value(r, c).imag());
        }
      }
      den << "\n";
    }
    write_file(dir + "/density.csv", den.str());
  }
}

}  // namespace specband
