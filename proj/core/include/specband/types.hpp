#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace specband {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

// (M - M^*) / 2i, the matrix "imaginary part" used throughout Herglotz checks.
inline Matrix imag_part(const Matrix& a) {
  return (a - a.adjoint()) / cplx(0.0, 2.0);
}

// Max-entry absolute value; the norm used for coefficient comparisons.
inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix& a, double tol) {
  return max_abs(Matrix(a - a.adjoint())) <= tol;
}

// Smallest eigenvalue of the Hermitian part of a (a is expected Hermitian
// up to rounding; the symmetrization keeps the solver applicable).
inline double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  return es.eigenvalues().maxCoeff();
}

}  // namespace specband
