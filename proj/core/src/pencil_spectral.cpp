#include "specband/pencil_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "specband/errors.hpp"

namespace specband {

namespace {

// Scalar polynomial roots via the (balanced enough for desk scale)
// companion matrix.
std::vector<cplx> scalar_roots(const std::vector<cplx>& coeffs) {
  int d = static_cast<int>(coeffs.size()) - 1;
  while (d > 0 && std::abs(coeffs[static_cast<std::size_t>(d)]) == 0.0) --d;
  if (d <= 0) return {};
  Matrix c = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) {
    c(i, d - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[static_cast<std::size_t>(d)];
  }
  Eigen::ComplexEigenSolver<Matrix> es(c, /*computeEigenvectors=*/false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + d);
  return roots;
}

Matrix leading_inverse(const MatrixPencil& p) {
  const Matrix& lead = p.coeff(p.degree());
  Eigen::FullPivLU<Matrix> lu(lead);
  if (!lu.isInvertible()) {
    throw SingularLeadingCoefficient("pencil leading coefficient is singular");
  }
  return lu.inverse();
}

}  // namespace

Matrix companion_matrix(const MatrixPencil& p) {
  const int m = p.dim();
  const int d = p.degree();
  if (d == 0) throw SingularLeadingCoefficient("degree-0 pencil has no companion matrix");
  const Matrix inv = leading_inverse(p);
  Matrix c = Matrix::Zero(d * m, d * m);
  for (int i = 0; i + 1 < d; ++i) {
    c.block(i * m, (i + 1) * m, m, m) = Matrix::Identity(m, m);
  }
  for (int k = 0; k < d; ++k) {
    c.block((d - 1) * m, k * m, m, m) = -inv * p.coeff(k);
  }
  return c;
}

std::vector<PencilRoot> det_roots(const MatrixPencil& p, double cluster_tol) {
  const Matrix c = companion_matrix(p);
  Eigen::ComplexEigenSolver<Matrix> es(c, /*computeEigenvectors=*/false);
  std::vector<cplx> vals(es.eigenvalues().data(), es.eigenvalues().data() + c.rows());
  std::sort(vals.begin(), vals.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  double scale = 1.0;
  for (cplx v : vals) scale = std::max(scale, std::abs(v));
  const double tol = cluster_tol * scale;

  std::vector<PencilRoot> roots;
  for (cplx v : vals) {
    if (!roots.empty() && std::abs(v - roots.back().value) <= tol) {
      PencilRoot& r = roots.back();
      // running mean keeps the cluster centroid stable
      r.value = (r.value * static_cast<double>(r.multiplicity) + v) /
                static_cast<double>(r.multiplicity + 1);
      r.multiplicity += 1;
    } else {
      roots.push_back({v, 1});
    }
  }
  return roots;
}

RootZoneReport root_zones(const MatrixPencil& p, int probes, std::uint64_t rng_seed) {
  const int m = p.dim();
  const int d = p.degree();
  const double scale = std::max(1.0, p.coeff_scale());
  if (!p.is_selfadjoint(1e-10 * scale)) {
    throw NonSelfAdjoint("root_zones requires a self-adjoint pencil");
  }
  if (min_eigenvalue(p.coeff(d)) <= 0.0) {
    throw IndefiniteLeading("root_zones requires a positive definite leading coefficient");
  }

  // Deterministic probe directions plus the eigenvectors of every
  // coefficient (they tend to hit the zone endpoints).
  std::vector<Eigen::VectorXcd> dirs;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < probes; ++t) {
    Eigen::VectorXcd f(m);
    for (int i = 0; i < m; ++i) f(i) = cplx(gauss(rng), gauss(rng));
    if (f.norm() == 0.0) f(0) = 1.0;
    dirs.push_back(f.normalized());
  }
  for (int k = 0; k <= d; ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p.coeff(k)));
    for (int i = 0; i < m; ++i) dirs.push_back(es.eigenvectors().col(i));
  }

  RootZoneReport report;
  report.zones.assign(static_cast<std::size_t>(d), {0.0, 0.0});
  bool first = true;
  bool all_real = true;
  bool all_distinct = true;
  const double imag_tol = 1e-8 * scale;

  for (const auto& f : dirs) {
    std::vector<cplx> sc(static_cast<std::size_t>(d) + 1);
    for (int k = 0; k <= d; ++k) sc[static_cast<std::size_t>(k)] = (f.adjoint() * p.coeff(k) * f)(0, 0);
    std::vector<cplx> roots = scalar_roots(sc);
    if (static_cast<int>(roots.size()) != d) {
      all_distinct = false;
      continue;
    }
    std::vector<double> re;
    for (cplx r : roots) {
      if (std::abs(r.imag()) > imag_tol * std::max(1.0, std::abs(r))) all_real = false;
      re.push_back(r.real());
    }
    std::sort(re.begin(), re.end());
    for (int j = 0; j + 1 < d; ++j) {
      if (re[static_cast<std::size_t>(j + 1)] - re[static_cast<std::size_t>(j)] <= imag_tol) {
        all_distinct = false;
      }
    }
    for (int j = 0; j < d; ++j) {
      auto& z = report.zones[static_cast<std::size_t>(j)];
      const double v = re[static_cast<std::size_t>(j)];
      if (first) {
        z = {v, v};
      } else {
        z.first = std::min(z.first, v);
        z.second = std::max(z.second, v);
      }
    }
    first = false;
  }

  if (!all_real) {
    report.hyperbolicity = Hyperbolicity::NotWeakly;
    return report;
  }
  report.hyperbolicity = all_distinct ? Hyperbolicity::Hyperbolic : Hyperbolicity::Weakly;

  // Envelope gaps give candidate separators; the definiteness certificate
  // upgrades the classification.
  bool disjoint = true;
  for (int j = 0; j + 1 < d; ++j) {
    if (report.zones[static_cast<std::size_t>(j)].second >=
        report.zones[static_cast<std::size_t>(j + 1)].first) {
      disjoint = false;
    }
  }
  if (disjoint && d >= 1) {
    for (int j = 0; j + 1 < d; ++j) {
      report.separators.push_back(0.5 * (report.zones[static_cast<std::size_t>(j)].second +
                                         report.zones[static_cast<std::size_t>(j + 1)].first));
    }
    const auto cert = check_strong_hyperbolicity(p, report.separators);
    report.worst_certificate_eig = cert.worst_min_eig;
    for (std::size_t j = 0; j < report.separators.size(); ++j) {
      report.certificate_signs.push_back(cert.strong ? 1 : 0);
    }
    if (cert.strong) {
      report.certified_strong = true;
      report.hyperbolicity = Hyperbolicity::Strongly;
    }
  }
  return report;
}

StrongHyperbolicityCertificate check_strong_hyperbolicity(const MatrixPencil& p,
                                                          const std::vector<double>& separators) {
  const int d = p.degree();
  if (static_cast<int>(separators.size()) != std::max(0, d - 1)) {
    throw WrongSeparatorCount("expected " + std::to_string(std::max(0, d - 1)) +
                              " separators, got " + std::to_string(separators.size()));
  }
  for (std::size_t j = 0; j + 1 < separators.size(); ++j) {
    if (!(separators[j] < separators[j + 1])) {
      throw WrongSeparatorCount("separators must be strictly increasing");
    }
  }
  StrongHyperbolicityCertificate cert;
  cert.separators = separators;
  cert.strong = true;
  cert.worst_min_eig = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= d - 1; ++j) {
    // d - j zones lie above gamma_j, so the value there has sign (-1)^{d-j}.
    const double sign = ((d - j) % 2 == 0) ? 1.0 : -1.0;
    const Matrix a = sign * p.eval(cplx(separators[static_cast<std::size_t>(j - 1)], 0.0));
    const double lo = min_eigenvalue(a);
    cert.worst_min_eig = std::min(cert.worst_min_eig, lo);
    if (lo <= 0.0) cert.strong = false;
  }
  if (d <= 1) cert.worst_min_eig = 0.0;
  return cert;
}

Matrix spectral_root(const MatrixPencil& p, double zone_lo, double zone_hi,
                     double cond_threshold) {
  const int m = p.dim();
  const Matrix c = companion_matrix(p);
  Eigen::ComplexEigenSolver<Matrix> es(c, /*computeEigenvectors=*/true);

  const double scale = std::max({1.0, std::abs(zone_lo), std::abs(zone_hi)});
  const double pad = 1e-8 * scale;
  std::vector<int> idx;
  for (int i = 0; i < c.rows(); ++i) {
    const cplx v = es.eigenvalues()(i);
    if (v.real() >= zone_lo - pad && v.real() <= zone_hi + pad && std::abs(v.imag()) <= pad) {
      idx.push_back(i);
    }
  }
  if (static_cast<int>(idx.size()) != m) {
    throw WrongEigenCountInZone("zone [" + std::to_string(zone_lo) + ", " +
                                std::to_string(zone_hi) + "] holds " +
                                std::to_string(idx.size()) + " eigenvalues, expected " +
                                std::to_string(m));
  }

  Matrix x(m, m);
  Matrix lambda = Matrix::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    x.col(k) = es.eigenvectors().col(idx[static_cast<std::size_t>(k)]).head(m);
    lambda(k, k) = es.eigenvalues()(idx[static_cast<std::size_t>(k)]);
  }
  Eigen::JacobiSVD<Matrix> svd(x);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > cond_threshold) {
    throw IllConditionedEigenbasis("eigenvector basis condition number above threshold");
  }
  return x * lambda * x.inverse();
}

MatrixPencil divide_right(const MatrixPencil& p, const Matrix& Z, double tol_rel) {
  const int d = p.degree();
  if (d < 1) throw NonzeroRemainder("cannot divide a degree-0 pencil");
  std::vector<Matrix> b(static_cast<std::size_t>(d));
  b[static_cast<std::size_t>(d - 1)] = p.coeff(d);
  for (int k = d - 1; k >= 1; --k) {
    b[static_cast<std::size_t>(k - 1)] = p.coeff(k) + b[static_cast<std::size_t>(k)] * Z;
  }
  const Matrix remainder = p.coeff(0) + b[0] * Z;
  const double scale = std::max(1.0, p.coeff_scale()) * std::max(1.0, max_abs(Z));
  if (max_abs(remainder) > tol_rel * scale) {
    throw NonzeroRemainder("division remainder " + std::to_string(max_abs(remainder)) +
                           " exceeds tolerance");
  }
  return MatrixPencil(std::move(b));
}

std::vector<Matrix> factorize(const MatrixPencil& p) {
  const int m = p.dim();
  std::vector<Matrix> factors;
  MatrixPencil current = p;
  while (current.degree() >= 1) {
    if (current.degree() == 1) {
      // z*B1 + B0 = B1 (z*I - Y) with Y = -B1^{-1} B0.
      Eigen::FullPivLU<Matrix> lu(current.coeff(1));
      if (!lu.isInvertible()) {
        throw SingularLeadingCoefficient("factorize: singular linear factor");
      }
      factors.push_back(-(lu.inverse() * current.coeff(0)));
      break;
    }
    std::vector<PencilRoot> roots = det_roots(current);
    std::vector<double> re;
    for (const PencilRoot& r : roots) {
      for (int t = 0; t < r.multiplicity; ++t) re.push_back(r.value.real());
    }
    std::sort(re.begin(), re.end());
    const double lo = re.front();
    const double hi = re[static_cast<std::size_t>(m - 1)];
    const Matrix y = spectral_root(current, lo, hi);
    factors.push_back(y);
    current = divide_right(current, y);
  }
  return factors;
}

Matrix vandermonde(const std::vector<Matrix>& roots) {
  const int d = static_cast<int>(roots.size());
  const int m = static_cast<int>(roots.front().rows());
  for (const Matrix& z : roots) {
    if (z.rows() != m || z.cols() != m) throw DimensionMismatch("vandermonde: roots must be m x m");
  }
  Matrix v(d * m, d * m);
  for (int j = 0; j < d; ++j) {
    Matrix power = Matrix::Identity(m, m);
    for (int i = 0; i < d; ++i) {
      v.block(i * m, j * m, m, m) = power;
      power = power * roots[static_cast<std::size_t>(j)];
    }
  }
  return v;
}

}  // namespace specband
