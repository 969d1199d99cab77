#include "specband/operator_data.hpp"

#include <algorithm>
#include <cmath>

#include "specband/errors.hpp"

namespace specband {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

// Chebyshev nodes on [lo, hi], nudged away from the poles at mu_k.
std::vector<double> interpolation_nodes(const BandStructure& bs,
                                        const std::vector<DirichletDatum>& data, int count) {
  const double lo = bs.edge(0) - bs.span();
  const double hi = bs.edge(bs.num_edges() - 1) + bs.span();
  const double guard = 1e-3 * bs.span();
  std::vector<double> nodes;
  int k = 0;
  int total = count;
  while (static_cast<int>(nodes.size()) < count) {
    if (k >= total) {
      total *= 2;  // denser Chebyshev family when nodes fell into guard zones
      k = 0;
      nodes.clear();
      continue;
    }
    const double t = std::cos(kPi * (2.0 * k + 1.0) / (2.0 * total));
    const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
    ++k;
    bool clear = true;
    for (const DirichletDatum& d : data) {
      if (std::abs(x - d.mu) < guard) clear = false;
    }
    if (clear) nodes.push_back(x);
  }
  return nodes;
}

// Entrywise polynomial interpolation of matrix samples; nodes.size() values
// determine a degree nodes.size()-1 pencil.
MatrixPencil interpolate_pencil(const std::vector<double>& nodes,
                                const std::vector<Matrix>& values) {
  const int p = static_cast<int>(nodes.size());
  const int m = static_cast<int>(values.front().rows());
  Eigen::MatrixXd vand(p, p);
  for (int i = 0; i < p; ++i) {
    double pw = 1.0;
    for (int j = 0; j < p; ++j) {
      vand(i, j) = pw;
      pw *= nodes[static_cast<std::size_t>(i)];
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(vand);
  MatrixPencil result(m, p - 1);
  Eigen::VectorXd rhs_re(p), rhs_im(p);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      for (int i = 0; i < p; ++i) {
        rhs_re(i) = values[static_cast<std::size_t>(i)](r, c).real();
        rhs_im(i) = values[static_cast<std::size_t>(i)](r, c).imag();
      }
      const Eigen::VectorXd sol_re = lu.solve(rhs_re);
      const Eigen::VectorXd sol_im = lu.solve(rhs_im);
      for (int k = 0; k < p; ++k) {
        result.coeff(k)(r, c) = cplx(sol_re(k), sol_im(k));
      }
    }
  }
  return result;
}

}  // namespace

MatrixPencil r_pencil(const BandStructure& bs, int m) {
  return MatrixPencil::from_real_coeffs(bs.r_coefficients(), m);
}

std::vector<cplx> default_z_samples(const BandStructure& bs) {
  const double s = bs.span();
  const double c = 0.5 * (bs.edge(0) + bs.edge(bs.num_edges() - 1));
  return {
      {c + 0.37 * s, 0.83 * s}, {c - 0.61 * s, 0.29 * s}, {c, 1.70 * s},
      {c + 0.11 * s, 0.05 * s}, {c - 1.30 * s, 0.40 * s}, {c + 1.90 * s, 1.10 * s},
  };
}

OperatorData build_quadruple(const MatrixPencil& f, const DirichletSet& ds,
                             const BandStructure& bs) {
  const int m = f.dim();
  const int n = bs.n();

  auto weight_sum = [&](cplx z) {
    Matrix s = Matrix::Zero(m, m);
    for (const DirichletDatum& d : ds.data) {
      s += (static_cast<double>(d.epsilon) / (z - d.mu)) * d.gamma;
    }
    return s;
  };

  // Values on the nodes; one extra control node guards the residue
  // cancellation that makes these rational expressions polynomial.
  const std::vector<double> nodes = interpolation_nodes(bs, ds.data, n + 3);
  std::vector<Matrix> g1_vals, g2_vals, h_vals;
  for (double x : nodes) {
    const cplx z(x, 0.0);
    const Matrix fz = f.eval(z);
    const Matrix s = weight_sum(z);
    g1_vals.push_back(s * fz);
    g2_vals.push_back(fz * s);
    h_vals.push_back(bs.eval_r(z) * Matrix(fz.inverse()) + s * fz * s);
  }

  const auto head = [](const std::vector<double>& v, int c) {
    return std::vector<double>(v.begin(), v.begin() + c);
  };
  const auto head_m = [](const std::vector<Matrix>& v, int c) {
    return std::vector<Matrix>(v.begin(), v.begin() + c);
  };

  OperatorData od{bs, f, MatrixPencil(m, 0), MatrixPencil(m, 0), MatrixPencil(m, 0), ds, n, m};
  od.g1 = (n >= 1) ? interpolate_pencil(head(nodes, n), head_m(g1_vals, n))
                   : MatrixPencil(m, 0);
  od.g2 = (n >= 1) ? interpolate_pencil(head(nodes, n), head_m(g2_vals, n))
                   : MatrixPencil(m, 0);
  od.h = interpolate_pencil(head(nodes, n + 2), head_m(h_vals, n + 2));

  // Control node: if the rational expressions were not polynomial of the
  // assumed degree, the interpolants cannot reproduce them here.
  const double ctl = nodes[static_cast<std::size_t>(n + 2)];
  const double scale = std::max({1.0, f.coeff_scale(), od.h.coeff_scale()});
  const double mismatch =
      std::max({max_abs(Matrix(od.g1.eval(ctl) - g1_vals[static_cast<std::size_t>(n + 2)])),
                max_abs(Matrix(od.g2.eval(ctl) - g2_vals[static_cast<std::size_t>(n + 2)])),
                max_abs(Matrix(od.h.eval(ctl) - h_vals[static_cast<std::size_t>(n + 2)]))});
  const double ctl_scale = scale * std::pow(std::max(1.0, std::abs(ctl)), n + 1);
  if (mismatch > 1e-7 * ctl_scale) {
    throw ResidueNotCancelled("interpolation control residual " + std::to_string(mismatch) +
                              "; gap data inconsistent with the seed");
  }

  // The interpolated coefficients inherit rounding noise; pin the exact
  // structure: Hermitian H with unit leading coefficient.
  for (int k = 0; k <= od.h.degree(); ++k) od.h.coeff(k) = hermitian_part(od.h.coeff(k));
  od.h.coeff(od.h.degree()) = Matrix::Identity(m, m);
  return od;
}

double QuadrupleReport::max_residual() const {
  return std::max({sym, commute_fg, commute_hg, fh, hf, sample});
}

QuadrupleReport verify_quadruple(const OperatorData& od, const std::vector<cplx>& z_samples) {
  QuadrupleReport rep;
  const MatrixPencil r = r_pencil(od.bs, od.m);
  rep.scale = std::max({1.0, od.f.coeff_scale(), od.g1.coeff_scale(), od.g2.coeff_scale(),
                        od.h.coeff_scale()});
  rep.scale = std::max(rep.scale, r.coeff_scale());

  rep.sym = coeff_distance(od.g2.conj_transpose(), od.g1);
  rep.commute_fg = coeff_distance(od.f * od.g1, od.g2 * od.f);
  rep.commute_hg = coeff_distance(od.h * od.g2, od.g1 * od.h);
  rep.fh = coeff_distance(od.f * od.h - od.g2 * od.g2, r);
  rep.hf = coeff_distance(od.h * od.f - od.g1 * od.g1, r);

  for (cplx z : z_samples) {
    const Matrix fz = od.f.eval(z), g1z = od.g1.eval(z), g2z = od.g2.eval(z), hz = od.h.eval(z);
    const cplx rz = od.bs.eval_r(z);
    const Matrix eye = Matrix::Identity(od.m, od.m);
    double local = max_abs(Matrix(fz * g1z - g2z * fz));
    local = std::max(local, max_abs(Matrix(hz * g2z - g1z * hz)));
    local = std::max(local, max_abs(Matrix(fz * hz - g2z * g2z - rz * eye)));
    local = std::max(local, max_abs(Matrix(hz * fz - g1z * g1z - rz * eye)));
    local = std::max(local, max_abs(Matrix(od.g2.eval(std::conj(z)).adjoint() - g1z)));
    const double zscale = std::pow(std::max(1.0, std::abs(z)), od.n + 1);
    rep.sample = std::max(rep.sample, local / zscale);
  }

  rep.degrees_ok = od.f.is_monic(1e-10) && od.h.is_monic(1e-10) &&
                   od.h.degree() == od.n + 1 && od.f.degree() == od.n &&
                   od.g1.trimmed(1e-9 * rep.scale).degree() <= std::max(0, od.n - 1) &&
                   od.g2.trimmed(1e-9 * rep.scale).degree() <= std::max(0, od.n - 1);
  return rep;
}

}  // namespace specband
