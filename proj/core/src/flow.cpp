#include "specband/flow.hpp"

#include <algorithm>
#include <cmath>

#include "specband/errors.hpp"
#include "specband/weyl.hpp"

namespace specband {

namespace {

std::vector<Matrix> to_descending(const MatrixPencil& p, int count) {
  // count coefficients H_0..H_{count-1} with H_j multiplying z^{d-j}
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    if (j <= p.degree()) {
      out.push_back(p.coeff_from_top(j));
    } else {
      out.push_back(Matrix::Zero(p.dim(), p.dim()));
    }
  }
  return out;
}

MatrixPencil from_descending(const std::vector<Matrix>& coeffs) {
  std::vector<Matrix> asc(coeffs.rbegin(), coeffs.rend());
  return MatrixPencil(std::move(asc));
}

FlowState axpy(const FlowState& a, double t, const FlowState& b) {
  FlowState r = a;
  r.x = a.x + t * b.x;
  for (std::size_t i = 0; i < r.f.size(); ++i) r.f[i] += t * b.f[i];
  for (std::size_t i = 0; i < r.g1.size(); ++i) r.g1[i] += t * b.g1[i];
  for (std::size_t i = 0; i < r.g2.size(); ++i) r.g2[i] += t * b.g2[i];
  for (std::size_t i = 0; i < r.h.size(); ++i) r.h[i] += t * b.h[i];
  return r;
}

void enforce_structure(FlowState& s) {
  const int m = s.m();
  s.f[0] = Matrix::Identity(m, m);
  s.h[0] = Matrix::Identity(m, m);
  for (Matrix& a : s.f) a = hermitian_part(a);
  for (Matrix& a : s.h) a = hermitian_part(a);
  for (std::size_t i = 0; i < s.g1.size(); ++i) {
    s.g1[i] = 0.5 * (s.g1[i] + s.g2[i].adjoint());
    s.g2[i] = s.g1[i].adjoint();
  }
}

FlowState rk4_step(const FlowState& s, double h) {
  const FlowState k1 = flow_derivative(s);
  const FlowState k2 = flow_derivative(axpy(s, 0.5 * h, k1));
  const FlowState k3 = flow_derivative(axpy(s, 0.5 * h, k2));
  const FlowState k4 = flow_derivative(axpy(s, h, k3));
  FlowState r = axpy(s, h / 6.0, k1);
  r = axpy(r, h / 3.0, k2);
  r = axpy(r, h / 3.0, k3);
  r = axpy(r, h / 6.0, k4);
  r.x = s.x + h;
  enforce_structure(r);
  return r;
}

// One interval [from.x, to_x] with substeps of size at most cfg.h.
FlowState integrate_interval(FlowState from, double to_x, const PropagationConfig& cfg) {
  const double len = to_x - from.x;
  if (len == 0.0) return from;
  if (!cfg.adaptive) {
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(len) / cfg.h)));
    const double h = len / steps;
    for (int i = 0; i < steps; ++i) from = rk4_step(from, h);
    from.x = to_x;
    return from;
  }
  // Step-doubling control: accept when the full step and two half steps
  // agree within adaptive_tol.
  double h = (len > 0 ? 1.0 : -1.0) * cfg.h;
  while ((len > 0 && from.x < to_x) || (len < 0 && from.x > to_x)) {
    if ((len > 0 && from.x + h > to_x) || (len < 0 && from.x + h < to_x)) h = to_x - from.x;
    const FlowState full = rk4_step(from, h);
    const FlowState half = rk4_step(rk4_step(from, 0.5 * h), 0.5 * h);
    double err = 0.0;
    for (std::size_t i = 0; i < full.f.size(); ++i) err = std::max(err, max_abs(Matrix(full.f[i] - half.f[i])));
    for (std::size_t i = 0; i < full.h.size(); ++i) err = std::max(err, max_abs(Matrix(full.h[i] - half.h[i])));
    if (err <= cfg.adaptive_tol || std::abs(h) < 1e-12) {
      from = half;
      h *= (err < 0.1 * cfg.adaptive_tol) ? 2.0 : 1.0;
    } else {
      h *= 0.5;
    }
  }
  from.x = to_x;
  return from;
}

}  // namespace

MatrixPencil FlowState::f_pencil() const { return from_descending(f); }
MatrixPencil FlowState::g1_pencil() const { return from_descending(g1); }
MatrixPencil FlowState::g2_pencil() const { return from_descending(g2); }
MatrixPencil FlowState::h_pencil() const { return from_descending(h); }

FlowState state_from_operator_data(const OperatorData& od, double x0) {
  FlowState s;
  s.x = x0;
  const int n = od.n;
  const int m = od.m;
  if (!od.f.is_monic(1e-10) || !od.h.is_monic(1e-10)) {
    throw ValidationError("flow state requires monic F and H");
  }
  s.f = to_descending(od.f, n + 1);
  s.h = to_descending(od.h, n + 2);
  // G pencils have degree <= n-1 but may have dropped leading coefficients;
  // pad on the high-power side.
  auto pad_g = [&](const MatrixPencil& g) {
    std::vector<Matrix> out(static_cast<std::size_t>(n), Matrix::Zero(m, m));
    for (int k = 0; k <= g.degree(); ++k) {
      // coefficient of z^k sits at descending index n-1-k
      out[static_cast<std::size_t>(n - 1 - k)] = g.coeff(k);
    }
    return out;
  };
  s.g1 = pad_g(od.g1);
  s.g2 = pad_g(od.g2);
  return s;
}

FlowState flow_derivative(const FlowState& s) {
  const int n = s.n();
  const int m = s.m();
  const Matrix q = s.potential();
  const Matrix zero = Matrix::Zero(m, m);

  auto f_at = [&](int l) { return (l >= 0 && l <= n) ? s.f[static_cast<std::size_t>(l)] : zero; };
  auto g1_at = [&](int l) { return (l >= 0 && l < n) ? s.g1[static_cast<std::size_t>(l)] : zero; };
  auto g2_at = [&](int l) { return (l >= 0 && l < n) ? s.g2[static_cast<std::size_t>(l)] : zero; };
  auto h_at = [&](int l) { return (l >= 0 && l <= n + 1) ? s.h[static_cast<std::size_t>(l)] : zero; };

  FlowState d;
  d.x = 1.0;  // dx/dx
  d.f.assign(static_cast<std::size_t>(n) + 1, zero);
  d.g1.assign(static_cast<std::size_t>(n), zero);
  d.g2.assign(static_cast<std::size_t>(n), zero);
  d.h.assign(static_cast<std::size_t>(n) + 2, zero);

  for (int l = 1; l <= n; ++l) {
    d.f[static_cast<std::size_t>(l)] = -(g1_at(l - 1) + g2_at(l - 1));
  }
  for (int l = 0; l <= n - 1; ++l) {
    const Matrix tail = f_at(l + 2) - h_at(l + 2);
    d.g1[static_cast<std::size_t>(l)] = -q * f_at(l + 1) + tail;
    d.g2[static_cast<std::size_t>(l)] = -f_at(l + 1) * q + tail;
  }
  for (int l = 1; l <= n + 1; ++l) {
    d.h[static_cast<std::size_t>(l)] =
        g1_at(l - 1) + g2_at(l - 1) - g1_at(l - 2) * q - q * g2_at(l - 2);
  }
  return d;
}

Trajectory propagate(const FlowState& s0, const std::vector<double>& x_grid,
                     const BandStructure& bs, const PropagationConfig& cfg) {
  if (x_grid.empty() || std::abs(x_grid.front() - s0.x) > 1e-12) {
    throw ValidationError("x grid must start at the state's x");
  }
  for (std::size_t i = 0; i + 1 < x_grid.size(); ++i) {
    const bool up = x_grid[1] > x_grid[0];
    if ((up && x_grid[i + 1] <= x_grid[i]) || (!up && x_grid[i + 1] >= x_grid[i])) {
      throw ValidationError("x grid must be strictly monotone");
    }
  }
  PropagationConfig c = cfg;
  if (c.drift_samples.empty()) c.drift_samples = default_z_samples(bs);

  Trajectory traj;
  traj.h = c.h;
  FlowState current = s0;
  double scale0 = 1.0;

  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (i > 0) current = integrate_interval(current, x_grid[i], c);
    const FlowInvariantReport rep = invariant_residuals(current, bs, c.drift_samples);
    if (i == 0) scale0 = rep.scale;
    traj.grid.push_back(x_grid[i]);
    traj.states.push_back(current);
    traj.drift.push_back(rep.max_residual());
    if (rep.max_residual() > c.drift_abort_rel * scale0) {
      throw DriftExceededError("invariant drift " + std::to_string(rep.max_residual()) +
                                   " exceeded bound at x = " + std::to_string(x_grid[i]),
                               traj);
    }
  }
  return traj;
}

double FlowInvariantReport::max_residual() const {
  return std::max({sym, commute_fg, commute_hg, hf, fh});
}

FlowInvariantReport invariant_residuals(const FlowState& s, const BandStructure& bs,
                                        const std::vector<cplx>& z_samples) {
  FlowInvariantReport rep;
  const MatrixPencil f = s.f_pencil();
  const MatrixPencil g1 = s.g1_pencil();
  const MatrixPencil g2 = s.g2_pencil();
  const MatrixPencil h = s.h_pencil();
  const MatrixPencil r = r_pencil(bs, s.m());

  rep.scale = std::max({1.0, f.coeff_scale(), g1.coeff_scale(), g2.coeff_scale(),
                        h.coeff_scale(), r.coeff_scale()});

  for (const Matrix& a : s.f) rep.sym = std::max(rep.sym, max_abs(Matrix(a - a.adjoint())));
  for (const Matrix& a : s.h) rep.sym = std::max(rep.sym, max_abs(Matrix(a - a.adjoint())));
  for (std::size_t i = 0; i < s.g1.size(); ++i) {
    rep.sym = std::max(rep.sym, max_abs(Matrix(s.g2[i].adjoint() - s.g1[i])));
  }

  rep.commute_fg = coeff_distance(f * g1, g2 * f);
  rep.commute_hg = coeff_distance(h * g2, g1 * h);
  rep.hf = coeff_distance(h * f - g1 * g1, r);
  rep.fh = coeff_distance(f * h - g2 * g2, r);

  const int m = s.m();
  for (cplx z : z_samples) {
    const Matrix fz = f.eval(z), g1z = g1.eval(z), g2z = g2.eval(z), hz = h.eval(z);
    const cplx rz = bs.eval_r(z);
    const Matrix eye = Matrix::Identity(m, m);
    const double zscale = std::pow(std::max(1.0, std::abs(z)), s.n() + 1);
    rep.commute_fg = std::max(rep.commute_fg, max_abs(Matrix(fz * g1z - g2z * fz)) / zscale);
    rep.commute_hg = std::max(rep.commute_hg, max_abs(Matrix(hz * g2z - g1z * hz)) / zscale);
    rep.hf = std::max(rep.hf, max_abs(Matrix(hz * fz - g1z * g1z - rz * eye)) / zscale);
    rep.fh = std::max(rep.fh, max_abs(Matrix(fz * hz - g2z * g2z - rz * eye)) / zscale);
  }
  return rep;
}

namespace {

// M_pm(z) at a state, straight from the pencils.
Matrix state_half_line(const FlowState& s, const BandStructure& bs, cplx z, bool plus,
                       bool lower_boundary = false) {
  const Matrix fz = s.f_pencil().eval(z);
  const Matrix finv = fz.inverse();
  const Matrix g1z = s.g1_pencil().eval(z);
  const cplx sr = (lower_boundary && std::abs(z.imag()) == 0.0)
                      ? bs.eval_sqrt_r_lower(z.real())
                      : bs.eval_sqrt_r(z);
  const cplx sgn = plus ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
  return sgn * sr * finv - g1z * finv;
}

}  // namespace

double RiccatiResidual::max_residual() const {
  double r = 0.0;
  for (double v : plus) r = std::max(r, v);
  for (double v : minus) r = std::max(r, v);
  return r;
}

RiccatiResidual riccati_residual(const Trajectory& traj, const BandStructure& bs, cplx z) {
  if (std::abs(z.imag()) == 0.0) throw AtSingularPoint("riccati residual needs Im(z) != 0");
  if (traj.states.size() < 3) throw GridTooCoarse("riccati residual needs at least 3 nodes");
  RiccatiResidual out;
  const int m = traj.states.front().m();
  const Matrix eye = Matrix::Identity(m, m);
  for (std::size_t i = 1; i + 1 < traj.states.size(); ++i) {
    const double dx = traj.grid[i + 1] - traj.grid[i - 1];
    const Matrix q = traj.states[i].potential();
    for (bool plus : {true, false}) {
      const Matrix mm = state_half_line(traj.states[i], bs, z, plus);
      const Matrix dmdx = (state_half_line(traj.states[i + 1], bs, z, plus) -
                           state_half_line(traj.states[i - 1], bs, z, plus)) /
                          dx;
      const double res = max_abs(Matrix(dmdx + mm * mm - (q - z * eye)));
      if (plus) {
        out.plus.push_back(res);
      } else {
        out.minus.push_back(res);
      }
    }
    out.x.push_back(traj.grid[i]);
  }
  return out;
}

std::vector<double> reflectionless_residual(const Trajectory& traj, const BandStructure& bs,
                                            double lambda, double eps) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const FlowState& s : traj.states) {
    const Matrix mp = state_half_line(s, bs, cplx(lambda, eps), /*plus=*/true);
    const Matrix mn = state_half_line(s, bs, cplx(lambda, -eps), /*plus=*/false);
    out.push_back(max_abs(Matrix(mp - mn)));
  }
  return out;
}

double LaxResidual::max_residual() const {
  double r = 0.0;
  for (double v : first_order) r = std::max(r, v);
  for (double v : second_order) r = std::max(r, v);
  return r;
}

LaxResidual lax_residual(const Trajectory& traj, const std::vector<cplx>& z_samples) {
  if (traj.states.size() < 5) throw GridTooCoarse("lax residual needs at least 5 nodes");
  LaxResidual out;
  const int m = traj.states.front().m();
  const Matrix eye = Matrix::Identity(m, m);

  for (std::size_t i = 2; i + 2 < traj.states.size(); ++i) {
    const double dx = traj.grid[i + 1] - traj.grid[i];
    const Matrix q = traj.states[i].potential();
    const Matrix qp = (traj.states[i + 1].potential() - traj.states[i - 1].potential()) / (2.0 * dx);
    double worst1 = 0.0, worst2 = 0.0;
    for (cplx z : z_samples) {
      auto fz = [&](std::size_t k) { return traj.states[k].f_pencil().eval(z); };
      auto g2z = [&](std::size_t k) { return traj.states[k].g2_pencil().eval(z); };
      const Matrix f0 = fz(i);
      const Matrix fp = (fz(i + 1) - fz(i - 1)) / (2.0 * dx);
      const Matrix fpp = (fz(i + 1) - 2.0 * f0 + fz(i - 1)) / (dx * dx);
      const Matrix g0 = g2z(i);
      const Matrix gp = (g2z(i + 1) - g2z(i - 1)) / (2.0 * dx);
      const Matrix gpp = (g2z(i + 1) - 2.0 * g0 + g2z(i - 1)) / (dx * dx);
      const double zscale = std::pow(std::max(1.0, std::abs(z)), traj.states[i].n() + 1);
      const Matrix first = gp - 0.5 * (-fpp + q * f0 - f0 * q);
      const Matrix second = gpp + 2.0 * fp * (q - z * eye) + f0 * qp - q * g0 + g0 * q;
      worst1 = std::max(worst1, max_abs(first) / zscale);
      worst2 = std::max(worst2, max_abs(second) / zscale);
    }
    out.x.push_back(traj.grid[i]);
    out.first_order.push_back(worst1);
    out.second_order.push_back(worst2);
  }
  return out;
}

}  // namespace specband
