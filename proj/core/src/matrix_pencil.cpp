#include "specband/matrix_pencil.hpp"

#include <algorithm>

#include "specband/errors.hpp"

namespace specband {

MatrixPencil::MatrixPencil(int m, int degree) : m_(m) {
  coeffs_.assign(static_cast<std::size_t>(degree) + 1, Matrix::Zero(m, m));
}

MatrixPencil::MatrixPencil(std::vector<Matrix> coeffs_ascending)
    : coeffs_(std::move(coeffs_ascending)) {
  if (coeffs_.empty()) throw DimensionMismatch("pencil needs at least one coefficient");
  m_ = static_cast<int>(coeffs_.front().rows());
  for (const Matrix& c : coeffs_) {
    if (c.rows() != m_ || c.cols() != m_) {
      throw DimensionMismatch("pencil coefficients must all be m x m");
    }
  }
}

MatrixPencil MatrixPencil::constant(const Matrix& a0) {
  return MatrixPencil(std::vector<Matrix>{a0});
}

MatrixPencil MatrixPencil::linear_monic(const Matrix& z0) {
  const int m = static_cast<int>(z0.rows());
  return MatrixPencil(std::vector<Matrix>{-z0, Matrix::Identity(m, m)});
}

MatrixPencil MatrixPencil::scalar(const std::vector<cplx>& coeffs_ascending) {
  std::vector<Matrix> c;
  c.reserve(coeffs_ascending.size());
  for (cplx v : coeffs_ascending) {
    Matrix a(1, 1);
    a(0, 0) = v;
    c.push_back(a);
  }
  return MatrixPencil(std::move(c));
}

MatrixPencil MatrixPencil::from_real_coeffs(const std::vector<double>& coeffs_ascending, int m) {
  std::vector<Matrix> c;
  c.reserve(coeffs_ascending.size());
  for (double v : coeffs_ascending) c.push_back(v * Matrix::Identity(m, m));
  return MatrixPencil(std::move(c));
}

Matrix MatrixPencil::eval(cplx z) const {
  Matrix acc = coeffs_.back();
  for (int k = degree() - 1; k >= 0; --k) {
    acc = z * acc + coeffs_[static_cast<std::size_t>(k)];
  }
  return acc;
}

Matrix MatrixPencil::eval_at(const Matrix& Z) const {
  if (Z.rows() != m_ || Z.cols() != m_) {
    throw DimensionMismatch("eval_at: argument must be m x m");
  }
  Matrix acc = coeffs_.back();
  for (int k = degree() - 1; k >= 0; --k) {
    acc = acc * Z + coeffs_[static_cast<std::size_t>(k)];
  }
  return acc;
}

MatrixPencil MatrixPencil::derivative() const {
  if (degree() == 0) return MatrixPencil(m_, 0);
  std::vector<Matrix> c;
  c.reserve(coeffs_.size() - 1);
  for (int k = 1; k <= degree(); ++k) {
    c.push_back(static_cast<double>(k) * coeffs_[static_cast<std::size_t>(k)]);
  }
  return MatrixPencil(std::move(c));
}

MatrixPencil MatrixPencil::conj_transpose() const {
  std::vector<Matrix> c;
  c.reserve(coeffs_.size());
  for (const Matrix& a : coeffs_) c.push_back(a.adjoint());
  return MatrixPencil(std::move(c));
}

MatrixPencil MatrixPencil::trimmed(double tol) const {
  std::size_t last = coeffs_.size();
  while (last > 1 && max_abs(coeffs_[last - 1]) <= tol) --last;
  return MatrixPencil(std::vector<Matrix>(coeffs_.begin(), coeffs_.begin() + static_cast<long>(last)));
}

bool MatrixPencil::is_selfadjoint(double tol) const {
  for (const Matrix& a : coeffs_) {
    if (!is_hermitian(a, tol)) return false;
  }
  return true;
}

bool MatrixPencil::is_monic(double tol) const {
  return max_abs(Matrix(coeffs_.back() - Matrix::Identity(m_, m_))) <= tol;
}

double MatrixPencil::coeff_scale() const {
  double s = 0.0;
  for (const Matrix& a : coeffs_) s = std::max(s, max_abs(a));
  return s;
}

MatrixPencil& MatrixPencil::operator+=(const MatrixPencil& rhs) {
  if (rhs.m_ != m_) throw DimensionMismatch("pencil sum: dimension mismatch");
  if (rhs.coeffs_.size() > coeffs_.size()) {
    coeffs_.resize(rhs.coeffs_.size(), Matrix::Zero(m_, m_));
  }
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
  return *this;
}

MatrixPencil& MatrixPencil::operator-=(const MatrixPencil& rhs) {
  if (rhs.m_ != m_) throw DimensionMismatch("pencil difference: dimension mismatch");
  if (rhs.coeffs_.size() > coeffs_.size()) {
    coeffs_.resize(rhs.coeffs_.size(), Matrix::Zero(m_, m_));
  }
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
  return *this;
}

MatrixPencil operator*(const MatrixPencil& a, const MatrixPencil& b) {
  if (a.m_ != b.m_) throw DimensionMismatch("pencil product: dimension mismatch");
  MatrixPencil r(a.m_, a.degree() + b.degree());
  for (int i = 0; i <= a.degree(); ++i) {
    for (int j = 0; j <= b.degree(); ++j) {
      r.coeff(i + j) += a.coeff(i) * b.coeff(j);
    }
  }
  return r;
}

MatrixPencil operator*(cplx s, MatrixPencil p) {
  for (Matrix& a : p.coeffs_) a *= s;
  return p;
}

bool is_selfadjoint(const MatrixPencil& p, double tol) { return p.is_selfadjoint(tol); }

double coeff_distance(const MatrixPencil& a, const MatrixPencil& b) {
  const int d = std::max(a.degree(), b.degree());
  double r = 0.0;
  for (int k = 0; k <= d; ++k) {
    const Matrix ca = k <= a.degree() ? a.coeff(k) : Matrix::Zero(a.dim(), a.dim());
    const Matrix cb = k <= b.degree() ? b.coeff(k) : Matrix::Zero(b.dim(), b.dim());
    r = std::max(r, max_abs(Matrix(ca - cb)));
  }
  return r;
}

}  // namespace specband
