#pragma once

#include <vector>

#include "specband/types.hpp"

namespace specband {

// Polynomial with m x m complex matrix coefficients,
//   P(z) = sum_{k=0}^d coeff(k) z^k,
// stored by ascending power.  coeff_from_top(j) exposes the complementary
// indexing P(z) = sum_l P_{d-l} z^l that spectral coefficient data uses,
// i.e. coeff_from_top(0) is the leading coefficient.
class MatrixPencil {
 public:
  MatrixPencil() = default;
  MatrixPencil(int m, int degree);  // zero coefficients
  explicit MatrixPencil(std::vector<Matrix> coeffs_ascending);

  static MatrixPencil constant(const Matrix& a0);
  static MatrixPencil linear_monic(const Matrix& z0);  // z*I - Z0
  static MatrixPencil scalar(const std::vector<cplx>& coeffs_ascending);
  static MatrixPencil from_real_coeffs(const std::vector<double>& coeffs_ascending, int m);

  int dim() const { return m_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  const Matrix& coeff(int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  Matrix& coeff(int k) { return coeffs_[static_cast<std::size_t>(k)]; }
  const Matrix& coeff_from_top(int j) const { return coeffs_[static_cast<std::size_t>(degree() - j)]; }

  Matrix eval(cplx z) const;           // Horner
  Matrix eval_at(const Matrix& Z) const;  // right substitution sum coeff(k) Z^k

  MatrixPencil derivative() const;
  // Pencil with adjointed coefficients; equals z -> P(conj z)^*.
  MatrixPencil conj_transpose() const;
  // Drops trailing (near-)zero leading coefficients.
  MatrixPencil trimmed(double tol = 0.0) const;

  bool is_selfadjoint(double tol) const;
  bool is_monic(double tol = 1e-12) const;

  // Max-entry norm over all coefficients.
  double coeff_scale() const;

  MatrixPencil& operator+=(const MatrixPencil& rhs);
  MatrixPencil& operator-=(const MatrixPencil& rhs);
  friend MatrixPencil operator+(MatrixPencil a, const MatrixPencil& b) { return a += b; }
  friend MatrixPencil operator-(MatrixPencil a, const MatrixPencil& b) { return a -= b; }
  friend MatrixPencil operator*(const MatrixPencil& a, const MatrixPencil& b);
  friend MatrixPencil operator*(cplx s, MatrixPencil p);

 private:
  int m_ = 0;
  std::vector<Matrix> coeffs_;
};

bool is_selfadjoint(const MatrixPencil& p, double tol);

// Max-entry distance between coefficients (pencils padded to equal degree).
double coeff_distance(const MatrixPencil& a, const MatrixPencil& b);

}  // namespace specband
