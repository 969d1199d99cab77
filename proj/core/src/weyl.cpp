#include "specband/weyl.hpp"

#include <cmath>

#include "specband/errors.hpp"

namespace specband {

WeylEvaluator::WeylEvaluator(OperatorData od) : od_(std::move(od)) {
  near_tol_ = 1e-9 * std::max(1.0, od_.bs.span());
}

double WeylEvaluator::scale(cplx z) const {
  const double coeffs = std::max({1.0, od_.f.coeff_scale(), od_.g1.coeff_scale(),
                                  od_.g2.coeff_scale(), od_.h.coeff_scale()});
  return coeffs * std::pow(std::max(1.0, std::abs(z)), od_.n + 1);
}

void WeylEvaluator::guard_singular(cplx z, BoundaryValue bv) const {
  for (const DirichletDatum& d : od_.ds.data) {
    if (std::abs(z - cplx(d.mu, 0.0)) <= near_tol_) {
      throw AtSingularPoint("z coincides with a gap point mu = " + std::to_string(d.mu));
    }
  }
  if (std::abs(z.imag()) <= near_tol_ && !od_.bs.in_gap_interior(z.real()) &&
      bv == BoundaryValue::None) {
    throw AtSingularPoint("z lies on the spectrum; request a boundary value explicitly");
  }
}

WeylEvaluator::Entry WeylEvaluator::evaluate(cplx z, BoundaryValue bv) const {
  const std::tuple<double, double, int> key{z.real(), z.imag(), static_cast<int>(bv)};
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Entry e;
  e.f = od_.f.eval(z);
  e.finv = e.f.inverse();
  e.g1 = od_.g1.eval(z);
  e.g2 = od_.g2.eval(z);
  e.h = od_.h.eval(z);
  e.sqrt_r = (bv == BoundaryValue::Lower && std::abs(z.imag()) <= near_tol_)
                 ? od_.bs.eval_sqrt_r_lower(z.real())
                 : od_.bs.eval_sqrt_r(z);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.emplace(key, e);
  }
  return e;
}

Matrix WeylEvaluator::half_line(cplx z, HalfLine side, BoundaryValue bv) const {
  guard_singular(z, bv);
  const Entry e = evaluate(z, bv);
  const cplx s = (side == HalfLine::Plus) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
  const Matrix via_g1 = s * e.sqrt_r * e.finv - e.g1 * e.finv;
  const Matrix via_g2 = s * e.sqrt_r * e.finv - e.finv * e.g2;
  if (max_abs(Matrix(via_g1 - via_g2)) > 1e-10 * scale(z)) {
    throw IdentityViolation("half-line evaluation routes disagree; operator data inconsistent");
  }
  return via_g1;
}

namespace {
struct FullRoutes {
  Matrix direct, blocks;
};
}  // namespace

Matrix WeylEvaluator::full(cplx z, BoundaryValue bv) const {
  guard_singular(z, bv);
  const Entry e = evaluate(z, bv);
  const int m = od_.m;
  const cplx w = cplx(0.0, 0.5) / e.sqrt_r;

  Matrix direct(2 * m, 2 * m);
  direct.block(0, 0, m, m) = w * e.h;
  direct.block(0, m, m, m) = -w * e.g2;
  direct.block(m, 0, m, m) = -w * e.g1;
  direct.block(m, m, m, m) = w * e.f;

  // Independent block route through the half-line matrices.
  const Matrix mp = half_line(z, HalfLine::Plus, bv);
  const Matrix mm = half_line(z, HalfLine::Minus, bv);
  const Matrix nminus = mm - mp;
  const Matrix nplus = mm + mp;
  Eigen::FullPivLU<Matrix> lu(nminus);
  if (!lu.isInvertible()) {
    throw SingularN("N_- = M_- - M_+ is singular at the requested z");
  }
  const Matrix ninv = lu.inverse();
  Matrix blocks(2 * m, 2 * m);
  blocks.block(0, 0, m, m) = mp * ninv * mm;
  blocks.block(0, m, m, m) = 0.5 * ninv * nplus;
  blocks.block(m, 0, m, m) = 0.5 * nplus * ninv;
  blocks.block(m, m, m, m) = ninv;

  if (max_abs(Matrix(direct - blocks)) > 1e-9 * scale(z)) {
    throw IdentityViolation("full-line evaluation routes disagree beyond tolerance");
  }
  return direct;
}

double WeylEvaluator::route_residual(cplx z, BoundaryValue bv) const {
  guard_singular(z, bv);
  const Entry e = evaluate(z, bv);
  const int m = od_.m;
  const cplx w = cplx(0.0, 0.5) / e.sqrt_r;
  Matrix direct(2 * m, 2 * m);
  direct.block(0, 0, m, m) = w * e.h;
  direct.block(0, m, m, m) = -w * e.g2;
  direct.block(m, 0, m, m) = -w * e.g1;
  direct.block(m, m, m, m) = w * e.f;

  const Matrix mp = half_line(z, HalfLine::Plus, bv);
  const Matrix mm = half_line(z, HalfLine::Minus, bv);
  const Matrix nminus = mm - mp;
  const Matrix nplus = mm + mp;
  Eigen::FullPivLU<Matrix> lu(nminus);
  if (!lu.isInvertible()) {
    throw SingularN("N_- = M_- - M_+ is singular at the requested z");
  }
  const Matrix ninv = lu.inverse();
  Matrix blocks(2 * m, 2 * m);
  blocks.block(0, 0, m, m) = mp * ninv * mm;
  blocks.block(0, m, m, m) = 0.5 * ninv * nplus;
  blocks.block(m, 0, m, m) = 0.5 * nplus * ninv;
  blocks.block(m, m, m, m) = ninv;
  return max_abs(Matrix(direct - blocks));
}

WeylEvaluator::Density WeylEvaluator::spectral_density(double lambda) const {
  Density d;
  const int m = od_.m;
  if (!od_.bs.in_band_interior(lambda)) {
    d.value = Matrix::Zero(2 * m, 2 * m);
    d.inside = false;
    return d;
  }
  const Entry e = evaluate(cplx(lambda, 0.0), BoundaryValue::Upper);
  const cplx w = 1.0 / (2.0 * 3.14159265358979323846264338328 * e.sqrt_r);
  Matrix v(2 * m, 2 * m);
  v.block(0, 0, m, m) = w * e.h;
  v.block(0, m, m, m) = -w * e.g2;
  v.block(m, 0, m, m) = -w * e.g1;
  v.block(m, m, m, m) = w * e.f;
  d.value = hermitian_part(v);
  d.inside = true;
  return d;
}

double WeylEvaluator::stieltjes_residual(double lambda, double eps) const {
  const Matrix approx = imag_part(full(cplx(lambda, eps))) / 3.14159265358979323846264338328;
  const Density d = spectral_density(lambda);
  return max_abs(Matrix(approx - d.value));
}

}  // namespace specband
