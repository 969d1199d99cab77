#include "specband/dirichlet.hpp"

#include <algorithm>
#include <cmath>

#include "specband/errors.hpp"

namespace specband {

int DirichletSet::total_rank() const {
  int r = 0;
  for (const DirichletDatum& d : data) r += d.rank;
  return r;
}

MatrixPencil default_seed(const BandStructure& bs, int m,
                          const std::vector<std::vector<double>>& placement) {
  const int n = bs.n();
  if (static_cast<int>(placement.size()) != n) {
    throw PlacementOutsideGap("expected one placement list per interior gap (" +
                              std::to_string(n) + "), got " + std::to_string(placement.size()));
  }
  for (int j = 1; j <= n; ++j) {
    const auto& row = placement[static_cast<std::size_t>(j - 1)];
    if (static_cast<int>(row.size()) != m) {
      throw PlacementOutsideGap("gap " + std::to_string(j) + " needs " + std::to_string(m) +
                                " placements");
    }
    for (double mu : row) {
      if (!bs.in_gap_closure(j, mu)) {
        throw PlacementOutsideGap("placement " + std::to_string(mu) + " outside gap " +
                                  std::to_string(j));
      }
    }
  }
  MatrixPencil f = MatrixPencil::constant(Matrix::Identity(m, m));
  for (int j = 1; j <= n; ++j) {
    Matrix z0 = Matrix::Zero(m, m);
    for (int r = 0; r < m; ++r) {
      z0(r, r) = placement[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(r)];
    }
    f = f * MatrixPencil::linear_monic(z0);
  }
  return f;
}

std::vector<cplx> default_herglotz_samples(const BandStructure& bs) {
  const double s = bs.span();
  const double c = 0.5 * (bs.edge(0) + bs.edge(bs.num_edges() - 1));
  std::vector<cplx> pts;
  const double re_off[] = {-0.8, -0.3, 0.0, 0.25, 0.7, 1.2};
  const double im_off[] = {0.05, 0.3, 1.0, 3.0};
  for (double re : re_off) {
    for (double im : im_off) {
      pts.emplace_back(c + re * s, im * s);
    }
  }
  pts.emplace_back(c, 10.0 * s);
  return pts;
}

HerglotzSeedReport verify_herglotz_seed(const MatrixPencil& f, const BandStructure& bs,
                                        const std::vector<cplx>& samples, double tol) {
  HerglotzSeedReport report;
  const double scale = std::max(1.0, f.coeff_scale());

  report.worst_imag_eig = std::numeric_limits<double>::infinity();
  for (cplx z : samples) {
    if (z.imag() <= 0.0) continue;
    const cplx w = cplx(0.0, 0.5) / bs.eval_sqrt_r(z);
    const double lo = min_eigenvalue(imag_part(Matrix(w * f.eval(z))));
    if (lo < report.worst_imag_eig) {
      report.worst_imag_eig = lo;
      report.worst_z = z;
    }
  }

  report.roots = det_roots(f);
  report.roots_in_gaps = true;
  const double root_tol = 1e-8 * std::max(1.0, bs.span());
  for (const PencilRoot& r : report.roots) {
    if (std::abs(r.value.imag()) > root_tol) {
      report.roots_in_gaps = false;
      continue;
    }
    const int j = bs.gap_index(r.value.real(), root_tol);
    if (j <= 0) report.roots_in_gaps = false;  // gap 0 not allowed for F
  }

  report.pass = report.roots_in_gaps && report.worst_imag_eig >= -tol * scale;
  return report;
}

DirichletSet extract_dirichlet(const MatrixPencil& f, const BandStructure& bs,
                               const std::vector<int>& epsilons) {
  const int m = f.dim();
  const int n = bs.n();
  const double scale = std::max(1.0, f.coeff_scale());

  std::vector<PencilRoot> roots = det_roots(f);
  std::sort(roots.begin(), roots.end(),
            [](const PencilRoot& a, const PencilRoot& b) { return a.value.real() < b.value.real(); });
  if (!epsilons.empty() && epsilons.size() != roots.size()) {
    throw ValidationError("expected " + std::to_string(roots.size()) + " epsilon signs, got " +
                          std::to_string(epsilons.size()));
  }

  DirichletSet ds;
  const MatrixPencil fprime = f.derivative();
  const double edge_tol = 1e-10 * std::max(1.0, bs.span());

  for (std::size_t k = 0; k < roots.size(); ++k) {
    DirichletDatum d;
    d.mu = roots[k].value.real();
    d.epsilon = epsilons.empty() ? 1 : epsilons[k];
    d.gap_index = bs.gap_index(d.mu, 1e-8 * std::max(1.0, bs.span()));

    if (bs.distance_to_edges(d.mu) <= edge_tol) {
      d.gamma = Matrix::Zero(m, m);
      d.rank = 0;
      d.at_band_edge = true;
      ds.data.push_back(d);
      continue;
    }

    // Null directions of the Hermitian value F(mu): the eigenvectors with
    // the smallest absolute eigenvalues, as many as the root multiplicity.
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(f.eval(cplx(d.mu, 0.0))));
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()(a)) < std::abs(es.eigenvalues()(b));
    });
    const int mult = roots[k].multiplicity;
    if (mult > m ||
        std::abs(es.eigenvalues()(order[static_cast<std::size_t>(mult - 1)])) > 1e-6 * scale) {
      throw DefectiveRoot("root at mu = " + std::to_string(d.mu) + " has nullity below its " +
                          "multiplicity " + std::to_string(mult));
    }

    Matrix v(m, mult);
    for (int c = 0; c < mult; ++c) v.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    const Matrix core = v.adjoint() * fprime.eval(cplx(d.mu, 0.0)) * v;
    Eigen::FullPivLU<Matrix> lu(core);
    if (!lu.isInvertible()) {
      throw DefectiveRoot("root at mu = " + std::to_string(d.mu) +
                          " is defective (singular F' on the nullspace)");
    }
    const cplx sr = bs.eval_sqrt_r(cplx(d.mu, 0.0));
    Matrix gamma = cplx(0.0, -1.0) * sr * (v * lu.inverse() * v.adjoint());
    gamma = hermitian_part(gamma);

    const double min_eig = min_eigenvalue(gamma);
    if (min_eig < -1e-8 * std::max(1.0, max_abs(gamma))) {
      throw NegativeGamma("residue weight at mu = " + std::to_string(d.mu) +
                          " has negative eigenvalue " + std::to_string(min_eig));
    }

    d.gamma = gamma;
    Eigen::SelfAdjointEigenSolver<Matrix> ges(gamma);
    const double rank_tol = 1e-8 * std::max(1.0, max_abs(gamma));
    d.rank = 0;
    for (int i = 0; i < m; ++i) {
      if (ges.eigenvalues()(i) > rank_tol) ++d.rank;
    }
    ds.data.push_back(d);
  }

  if (ds.total_rank() > m * n) {
    throw ValidationError("total residue rank " + std::to_string(ds.total_rank()) +
                          " exceeds m*n = " + std::to_string(m * n));
  }
  std::vector<int> per_gap(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t k = 0; k < roots.size(); ++k) {
    const int j = ds.data[k].gap_index;
    if (j < 1 || j > n) {
      throw ValidationError("root at mu = " + std::to_string(ds.data[k].mu) +
                            " lies outside every interior gap closure");
    }
    per_gap[static_cast<std::size_t>(j)] += roots[k].multiplicity;
  }
  for (int j = 1; j <= n; ++j) {
    if (per_gap[static_cast<std::size_t>(j)] != m) {
      throw ValidationError("gap " + std::to_string(j) + " carries multiplicity " +
                            std::to_string(per_gap[static_cast<std::size_t>(j)]) +
                            ", expected " + std::to_string(m));
    }
  }

  // Hermitian z^0 coefficient of i R^{1/2} F^{-1} + sum_k gamma_k/(z - mu_k),
  // evaluated at two large real points with Richardson extrapolation to kill
  // the 1/z tail.  (The half-power tail of i R^{1/2} F^{-1} is skew there.)
  const double z1 = 1e3 * std::max(1.0, bs.span()) + bs.edge(bs.num_edges() - 1);
  const double z2 = 10.0 * z1;
  auto phi_herm = [&](double t) {
    Matrix a = cplx(0.0, 1.0) * bs.eval_sqrt_r(cplx(t, 0.0)) *
               Matrix(f.eval(cplx(t, 0.0)).inverse());
    for (const DirichletDatum& d : ds.data) a += d.gamma / (t - d.mu);
    return hermitian_part(a);
  };
  const Matrix p1 = phi_herm(z1);
  const Matrix p2 = phi_herm(z2);
  ds.gamma0 = (z2 * p2 - z1 * p1) / (z2 - z1);
  return ds;
}

}  // namespace specband
