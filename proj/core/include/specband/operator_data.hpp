#pragma once

#include <vector>

#include "specband/band_structure.hpp"
#include "specband/dirichlet.hpp"
#include "specband/matrix_pencil.hpp"

namespace specband {

// The anchored quadruple: F monic of degree n, G1/G2 of degree <= n-1,
// H monic of degree n+1, tied together by
//   G2(conj z)^* = G1(z),    F G1 = G2 F,    H G2 = G1 H,
//   F H - G2^2 = R I,        H F - G1^2 = R I.
struct OperatorData {
  BandStructure bs;
  MatrixPencil f, g1, g2, h;
  DirichletSet ds;
  int n = 0;
  int m = 0;
};

// Materializes G1, G2, H from the seed and its gap data by polynomial
// interpolation at Chebyshev nodes away from the mu_k.  Throws
// ResidueNotCancelled when a control node disagrees with the interpolant.
OperatorData build_quadruple(const MatrixPencil& f, const DirichletSet& ds,
                             const BandStructure& bs);

struct QuadrupleReport {
  double sym = 0.0;         // G2(conj z)^* vs G1 coefficientwise
  double commute_fg = 0.0;  // F G1 - G2 F
  double commute_hg = 0.0;  // H G2 - G1 H
  double fh = 0.0;          // F H - G2^2 - R I
  double hf = 0.0;          // H F - G1^2 - R I
  double sample = 0.0;      // worst pointwise residual over the z samples
  bool degrees_ok = false;
  double scale = 1.0;
  double max_residual() const;
  bool pass(double tol_rel) const { return degrees_ok && max_residual() <= tol_rel * scale; }
};

QuadrupleReport verify_quadruple(const OperatorData& od, const std::vector<cplx>& z_samples);

// R(z) * I_m as a pencil.
MatrixPencil r_pencil(const BandStructure& bs, int m);

// Deterministic off-axis sample points for identity checks.
std::vector<cplx> default_z_samples(const BandStructure& bs);

}  // namespace specband
