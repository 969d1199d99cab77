#include "specband/kdv.hpp"

#include <algorithm>
#include <cmath>

#include "specband/errors.hpp"
#include "specband/pencil_spectral.hpp"

namespace specband {

InvariantSeries series_from_state(const FlowState& s, const EdgeSeries& es, int K) {
  if (es.K < K) throw ValidationError("edge series order below requested K");
  const int n = s.n();
  const int m = s.m();
  InvariantSeries out;
  out.K = K;
  out.rhat.assign(static_cast<std::size_t>(K) + 1, Matrix::Zero(m, m));
  out.hhat.assign(static_cast<std::size_t>(K) + 1, Matrix::Zero(m, m));
  out.rhat_route.assign(static_cast<std::size_t>(K) + 1, SeriesRoute::Pencil);
  out.hhat_route.assign(static_cast<std::size_t>(K) + 1, SeriesRoute::Pencil);

  for (int l = 0; l <= std::min(K, n); ++l) {
    Matrix acc = Matrix::Zero(m, m);
    for (int k = 0; k <= l; ++k) {
      acc += es.chat[static_cast<std::size_t>(l - k)] * s.f[static_cast<std::size_t>(k)];
    }
    out.rhat[static_cast<std::size_t>(l)] = acc;
  }
  for (int l = n + 1; l <= K; ++l) {
    // 0 = sum_{j<=l} c_{l-j} rhat_j rearranged for the top entry.
    Matrix acc = Matrix::Zero(m, m);
    for (int j = 0; j < l; ++j) {
      acc -= es.c[static_cast<std::size_t>(l - j)] * out.rhat[static_cast<std::size_t>(j)];
    }
    out.rhat[static_cast<std::size_t>(l)] = acc;
    out.rhat_route[static_cast<std::size_t>(l)] = SeriesRoute::Extension;
  }

  for (int l = 0; l <= std::min(K, n + 1); ++l) {
    Matrix acc = Matrix::Zero(m, m);
    for (int k = 0; k <= l; ++k) {
      acc += es.chat[static_cast<std::size_t>(l - k)] * s.h[static_cast<std::size_t>(k)];
    }
    out.hhat[static_cast<std::size_t>(l)] = acc;
  }
  for (int l = n + 2; l <= K; ++l) {
    Matrix acc = Matrix::Zero(m, m);
    for (int j = 0; j < l; ++j) {
      acc -= es.c[static_cast<std::size_t>(l - j)] * out.hhat[static_cast<std::size_t>(j)];
    }
    out.hhat[static_cast<std::size_t>(l)] = acc;
    out.hhat_route[static_cast<std::size_t>(l)] = SeriesRoute::Extension;
  }

  out.ghat_count = std::min(K, n) + 1;
  out.ghat1.assign(static_cast<std::size_t>(out.ghat_count), Matrix::Zero(m, m));
  out.ghat2.assign(static_cast<std::size_t>(out.ghat_count), Matrix::Zero(m, m));
  for (int l = 1; l < out.ghat_count; ++l) {
    Matrix a1 = Matrix::Zero(m, m), a2 = Matrix::Zero(m, m);
    for (int k = 0; k <= l - 1; ++k) {
      a1 += es.chat[static_cast<std::size_t>(l - 1 - k)] * s.g1[static_cast<std::size_t>(k)];
      a2 += es.chat[static_cast<std::size_t>(l - 1 - k)] * s.g2[static_cast<std::size_t>(k)];
    }
    out.ghat1[static_cast<std::size_t>(l)] = a1;
    out.ghat2[static_cast<std::size_t>(l)] = a2;
  }
  return out;
}

namespace {

Matrix central_diff(const std::vector<Matrix>& v, std::size_t i, double dx) {
  return (v[i + 1] - v[i - 1]) / (2.0 * dx);
}

Matrix central_diff2(const std::vector<Matrix>& v, std::size_t i, double dx) {
  return (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
}

Matrix central_diff3(const std::vector<Matrix>& v, std::size_t i, double dx) {
  return (v[i + 2] - 2.0 * v[i + 1] + 2.0 * v[i - 1] - v[i - 2]) / (2.0 * dx * dx * dx);
}

}  // namespace

ExplicitSeries explicit_low_order(const std::vector<Matrix>& q_grid, double dx) {
  if (q_grid.size() < 5) throw GridTooCoarse("explicit series needs at least 5 nodes");
  ExplicitSeries out;
  const std::size_t count = q_grid.size();
  out.lo = 2;
  out.hi = static_cast<int>(count) - 3;
  const int m = static_cast<int>(q_grid.front().rows());
  const Matrix zero = Matrix::Zero(m, m);
  out.rhat1.assign(count, zero);
  out.rhat2.assign(count, zero);
  out.ghat11.assign(count, zero);
  out.ghat12.assign(count, zero);
  out.ghat21.assign(count, zero);
  out.ghat22.assign(count, zero);
  out.hhat1.assign(count, zero);
  out.hhat2.assign(count, zero);

  std::vector<Matrix> q2(count);
  for (std::size_t i = 0; i < count; ++i) q2[i] = q_grid[i] * q_grid[i];

  for (std::size_t i = 2; i + 2 < count; ++i) {
    const Matrix& q = q_grid[i];
    const Matrix qp = central_diff(q_grid, i, dx);
    const Matrix qpp = central_diff2(q_grid, i, dx);
    const Matrix qppp = central_diff3(q_grid, i, dx);
    const Matrix q2p = central_diff(q2, i, dx);
    out.rhat1[i] = 0.5 * q;
    out.rhat2[i] = -qpp / 8.0 + 3.0 / 8.0 * q2[i];
    out.hhat1[i] = -0.5 * q;
    out.hhat2[i] = qpp / 8.0 - q2[i] / 8.0;
    out.ghat11[i] = -0.25 * qp;
    out.ghat21[i] = -0.25 * qp;
    out.ghat12[i] = qppp / 16.0 - q2p / 8.0 - qp * q / 8.0;
    out.ghat22[i] = qppp / 16.0 - q2p / 8.0 - q * qp / 8.0;
  }
  return out;
}

MExpansion m_expansion_recursion(const std::vector<Matrix>& q_grid, double dx, int K) {
  if (K < 1) throw ValidationError("m expansion order must be >= 1");
  // Each recursion level spends one node on each side for its derivative.
  if (static_cast<int>(q_grid.size()) < 2 * K + 1) {
    throw GridTooCoarse("m expansion to order " + std::to_string(K) + " needs " +
                        std::to_string(2 * K + 1) + " nodes");
  }
  MExpansion out;
  out.K = K;
  const std::size_t count = q_grid.size();
  const int m = static_cast<int>(q_grid.front().rows());
  const Matrix zero = Matrix::Zero(m, m);
  out.plus.assign(static_cast<std::size_t>(K), std::vector<Matrix>(count, zero));
  out.minus.assign(static_cast<std::size_t>(K), std::vector<Matrix>(count, zero));

  for (std::size_t i = 0; i < count; ++i) {
    out.plus[0][i] = cplx(0.0, -0.5) * q_grid[i];
    out.minus[0][i] = cplx(0.0, 0.5) * q_grid[i];
  }
  if (K >= 2) {
    for (std::size_t i = 1; i + 1 < count; ++i) {
      const Matrix qp = central_diff(q_grid, i, dx);
      out.plus[1][i] = 0.25 * qp;
      out.minus[1][i] = 0.25 * qp;
    }
  }
  for (int k = 2; k < K; ++k) {
    // valid band shrinks with each derivative
    for (std::size_t i = static_cast<std::size_t>(k); i + static_cast<std::size_t>(k) < count; ++i) {
      Matrix acc_p = central_diff(out.plus[static_cast<std::size_t>(k - 1)], i, dx);
      Matrix acc_m = central_diff(out.minus[static_cast<std::size_t>(k - 1)], i, dx);
      for (int l = 1; l <= k - 1; ++l) {
        acc_p += out.plus[static_cast<std::size_t>(l - 1)][i] *
                 out.plus[static_cast<std::size_t>(k - l - 1)][i];
        acc_m += out.minus[static_cast<std::size_t>(l - 1)][i] *
                 out.minus[static_cast<std::size_t>(k - l - 1)][i];
      }
      out.plus[static_cast<std::size_t>(k)][i] = cplx(0.0, 0.5) * acc_p;
      out.minus[static_cast<std::size_t>(k)][i] = cplx(0.0, -0.5) * acc_m;
    }
  }
  out.lo = std::max(1, K - 1);
  out.hi = static_cast<int>(count) - 1 - out.lo;
  return out;
}

std::vector<std::vector<Matrix>> rhat_from_m_expansion(const MExpansion& me, int kmax) {
  if (me.K < 2 * kmax - 1) {
    throw GridTooCoarse("m expansion order " + std::to_string(me.K) +
                        " too low for rhat_" + std::to_string(kmax));
  }
  const std::size_t count = me.plus.front().size();
  const int m = static_cast<int>(me.plus.front().front().rows());
  const Matrix eye = Matrix::Identity(m, m);
  std::vector<std::vector<Matrix>> out(static_cast<std::size_t>(kmax) + 1,
                                       std::vector<Matrix>(count, Matrix::Zero(m, m)));
  const int rows = 2 * kmax + 1;
  for (std::size_t i = 0; i < count; ++i) {
    // a_0 = -2i I; a_{k+1} = M_{-,k} - M_{+,k}; b = a^{-1} as a w-series.
    std::vector<Matrix> a(static_cast<std::size_t>(rows), Matrix::Zero(m, m));
    a[0] = cplx(0.0, -2.0) * eye;
    for (int k = 1; k < rows; ++k) {
      if (k - 2 >= 0 && k - 2 < me.K) {
        a[static_cast<std::size_t>(k)] = me.minus[static_cast<std::size_t>(k - 2)][i] -
                                         me.plus[static_cast<std::size_t>(k - 2)][i];
      }
    }
    const Matrix a0_inv = cplx(0.0, 0.5) * eye;  // (-2i)^{-1}
    std::vector<Matrix> b(static_cast<std::size_t>(rows), Matrix::Zero(m, m));
    b[0] = a0_inv;
    for (int j = 1; j < rows; ++j) {
      Matrix acc = Matrix::Zero(m, m);
      for (int l = 1; l <= j; ++l) {
        acc += a[static_cast<std::size_t>(l)] * b[static_cast<std::size_t>(j - l)];
      }
      b[static_cast<std::size_t>(j)] = -a0_inv * acc;
    }
    for (int k = 0; k <= kmax; ++k) {
      out[static_cast<std::size_t>(k)][i] = cplx(0.0, -2.0) * b[static_cast<std::size_t>(2 * k)];
    }
  }
  return out;
}

TraceReport trace_formulas(const FlowState& s, const BandStructure& bs, const EdgeSeries& es) {
  TraceReport rep;
  rep.x = s.x;
  const int n = s.n();
  const int m = s.m();
  const MatrixPencil f = s.f_pencil();
  const MatrixPencil h = s.h_pencil();
  rep.scale = std::max({1.0, f.coeff_scale(), h.coeff_scale()});

  rep.u_roots = factorize(f);
  rep.v_roots = factorize(h);

  // Zone confinement of the factor spectra.
  rep.zones_confined = true;
  rep.zone_margin = 0.0;
  auto check_roots = [&](const std::vector<Matrix>& roots, bool include_gap0) {
    for (std::size_t j = 0; j < roots.size(); ++j) {
      Eigen::ComplexEigenSolver<Matrix> ev(roots[j], /*computeEigenvectors=*/false);
      const int gap = include_gap0 ? static_cast<int>(j) : static_cast<int>(j) + 1;
      for (int i = 0; i < m; ++i) {
        const cplx lam = ev.eigenvalues()(i);
        double excess = std::abs(lam.imag());
        const auto [lo, hi] = bs.gap(gap);
        if (lam.real() < lo) excess = std::max(excess, lo - lam.real());
        if (lam.real() > hi) excess = std::max(excess, lam.real() - hi);
        rep.zone_margin = std::max(rep.zone_margin, excess);
      }
    }
  };
  check_roots(rep.u_roots, /*include_gap0=*/false);
  check_roots(rep.v_roots, /*include_gap0=*/true);
  rep.zones_confined = rep.zone_margin <= 1e-8 * std::max(1.0, bs.span());

  const InvariantSeries series = series_from_state(s, es, n + 1);

  // Ordered elementary symmetric block sums from re-expanding the factors;
  // the z^{d-k} coefficient of the product is (-1)^k e_k.
  auto expand = [&](const std::vector<Matrix>& roots) {
    MatrixPencil p = MatrixPencil::constant(Matrix::Identity(m, m));
    for (const Matrix& y : roots) p = MatrixPencil::linear_monic(y) * p;
    return p;
  };
  const MatrixPencil fx = expand(rep.u_roots);
  const MatrixPencil hx = expand(rep.v_roots);
  auto reversed = [&](std::vector<Matrix> roots) {
    std::reverse(roots.begin(), roots.end());
    return expand(roots);
  };
  const MatrixPencil fx_rev = reversed(rep.u_roots);

  for (int k = 1; k <= n; ++k) {
    Matrix rhs = Matrix::Zero(m, m);
    for (int l = 0; l <= k; ++l) {
      rhs += es.c[static_cast<std::size_t>(k - l)] * series.rhat[static_cast<std::size_t>(l)];
    }
    rep.f_resid.push_back(max_abs(Matrix(fx.coeff_from_top(k) - rhs)));
    rep.f_resid_reversed.push_back(max_abs(Matrix(fx_rev.coeff_from_top(k) - rhs)));
  }
  for (int k = 1; k <= n + 1; ++k) {
    Matrix rhs = Matrix::Zero(m, m);
    for (int l = 0; l <= k; ++l) {
      rhs += es.c[static_cast<std::size_t>(k - l)] * series.hhat[static_cast<std::size_t>(l)];
    }
    rep.h_resid.push_back(max_abs(Matrix(hx.coeff_from_top(k) - rhs)));
  }

  // k = 1 trace formulas for the potential.
  const Matrix q = s.potential();
  Matrix usum = Matrix::Zero(m, m), vsum = Matrix::Zero(m, m);
  for (const Matrix& u : rep.u_roots) usum += u;
  for (const Matrix& v : rep.v_roots) vsum += v;
  const Matrix eye = Matrix::Identity(m, m);
  rep.q_from_u = max_abs(Matrix(q - (bs.edge_sum() * eye - 2.0 * usum)));
  rep.q_from_v = max_abs(Matrix(q - (-bs.edge_sum() * eye + 2.0 * vsum)));
  return rep;
}

double SkdvResidual::max_residual() const {
  double r = 0.0;
  for (double v : residual) r = std::max(r, v);
  return r;
}

SkdvResidual skdv_residual(const Trajectory& traj, const EdgeSeries& es) {
  if (traj.states.size() < 7) throw GridTooCoarse("skdv residual needs at least 7 nodes");
  const int n = traj.states.front().n();
  const int m = traj.states.front().m();
  const double dx = traj.dx();
  const std::size_t count = traj.states.size();

  std::vector<Matrix> q_grid;
  q_grid.reserve(count);
  for (const FlowState& s : traj.states) q_grid.push_back(s.potential());
  const ExplicitSeries ex = explicit_low_order(q_grid, dx);

  // Per-node series entries: differential-polynomial route for orders 1
  // and 2, pencil route above.  (With every entry taken from the pencil
  // route the sum telescopes to a constant and the residual collapses to
  // rounding; the mixed assembly keeps it an honest discretization check.)
  std::vector<std::vector<Matrix>> rh(static_cast<std::size_t>(n) + 2,
                                      std::vector<Matrix>(count, Matrix::Zero(m, m)));
  for (std::size_t i = 0; i < count; ++i) {
    const InvariantSeries series = series_from_state(traj.states[i], es, n + 1);
    for (int k = 1; k <= n + 1; ++k) {
      if (k == 1) {
        rh[static_cast<std::size_t>(k)][i] = ex.rhat1[i];
      } else if (k == 2) {
        rh[static_cast<std::size_t>(k)][i] = ex.rhat2[i];
      } else {
        rh[static_cast<std::size_t>(k)][i] = series.rhat[static_cast<std::size_t>(k)];
      }
    }
  }

  SkdvResidual out;
  for (std::size_t i = 3; i + 3 < count; ++i) {
    Matrix acc = Matrix::Zero(m, m);
    for (int l = 0; l <= n; ++l) {
      acc += es.c[static_cast<std::size_t>(n - l)] *
             central_diff(rh[static_cast<std::size_t>(l + 1)], i, dx);
    }
    out.x.push_back(traj.grid[i]);
    out.residual.push_back(max_abs(Matrix(-2.0 * acc)));
  }
  return out;
}

double nonabelian_probe(const MatrixPencil& f, cplx z1, cplx z2) {
  const Matrix a = f.eval(z1);
  const Matrix b = f.eval(z2);
  return (a * b - b * a).norm();
}

}  // namespace specband
