#pragma once

#include <map>
#include <mutex>
#include <tuple>

#include "specband/operator_data.hpp"

namespace specband {

enum class HalfLine { Plus, Minus };

// How to treat a real z: reject it, or take the boundary value from the
// upper / lower half-plane.
enum class BoundaryValue { None, Upper, Lower };

// Evaluates the half-line matrices
//   M_pm(z) = pm i R^{1/2}(z) F(z)^{-1} - G1(z) F(z)^{-1}
// and the 2m x 2m full-line matrix; the two closed forms of each are
// cross-checked at every call.  Queries are logically pure; the value cache
// is lock-protected for concurrent use.
class WeylEvaluator {
 public:
  explicit WeylEvaluator(OperatorData od);

  const OperatorData& data() const { return od_; }

  Matrix half_line(cplx z, HalfLine side, BoundaryValue bv = BoundaryValue::None) const;
  Matrix full(cplx z, BoundaryValue bv = BoundaryValue::None) const;

  struct Density {
    Matrix value;   // 2m x 2m, zero outside the bands
    bool inside = false;
  };
  // d Omega / d lambda at a real point; the zero matrix with inside=false
  // when lambda is off the spectrum.
  Density spectral_density(double lambda) const;

  // || (1/pi) Im full(lambda + i eps) - density(lambda) ||, linear in eps.
  double stieltjes_residual(double lambda, double eps) const;

  // Disagreement between the closed pencil form and the half-line block
  // form of the full matrix (absolute, max-entry).
  double route_residual(cplx z, BoundaryValue bv = BoundaryValue::None) const;

  double scale(cplx z) const;  // tolerance scale at z

 private:
  struct Entry {
    Matrix f, finv, g1, g2, h;
    cplx sqrt_r;
  };
  Entry evaluate(cplx z, BoundaryValue bv) const;
  void guard_singular(cplx z, BoundaryValue bv) const;

  OperatorData od_;
  double near_tol_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::tuple<double, double, int>, Entry> cache_;
};

}  // namespace specband
