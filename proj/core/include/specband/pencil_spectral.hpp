#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "specband/matrix_pencil.hpp"

namespace specband {

struct PencilRoot {
  cplx value;
  int multiplicity = 1;
};

// Block-companion linearization of a pencil with invertible leading
// coefficient; size (d*m) x (d*m).
Matrix companion_matrix(const MatrixPencil& p);

// All d*m spectrum points, clustered into multiplicity groups by a relative
// gap tolerance.  Throws SingularLeadingCoefficient.
std::vector<PencilRoot> det_roots(const MatrixPencil& p, double cluster_tol = 1e-7);

enum class Hyperbolicity { NotWeakly, Weakly, Hyperbolic, Strongly };

struct RootZoneReport {
  // Envelope estimate [min, max] of the j-th ordered section root over the
  // sampled unit vectors; contained in the true root zone by construction.
  std::vector<std::pair<double, double>> zones;
  Hyperbolicity hyperbolicity = Hyperbolicity::NotWeakly;
  std::vector<double> separators;      // gamma_j used for the certificate
  std::vector<int> certificate_signs;  // +1 where the definiteness test held
  double worst_certificate_eig = 0.0;
  bool certified_strong = false;
};

// Samples `probes` deterministic unit vectors (plus the eigenvectors of
// every coefficient) and reports per-index root envelopes.  Throws
// NonSelfAdjoint / IndefiniteLeading.
RootZoneReport root_zones(const MatrixPencil& p, int probes, std::uint64_t rng_seed);

struct StrongHyperbolicityCertificate {
  bool strong = false;
  std::vector<double> separators;
  double worst_min_eig = 0.0;  // smallest definiteness margin encountered
};

// Separator test: with zones ordered ascending, the pencil value at a point
// with d-j zones above must have sign (-1)^{d-j}; requires d-1 strictly
// increasing separators.  Throws WrongSeparatorCount.
StrongHyperbolicityCertificate check_strong_hyperbolicity(const MatrixPencil& p,
                                                          const std::vector<double>& separators);

// Matrix root carrying exactly the spectrum in [zone_lo, zone_hi], built
// from the companion eigenpairs in that window.  Throws
// WrongEigenCountInZone / IllConditionedEigenbasis.
Matrix spectral_root(const MatrixPencil& p, double zone_lo, double zone_hi,
                     double cond_threshold = 1e8);

// Quotient B with P(z) = B(z) (z*I - Z); throws NonzeroRemainder when
// P(Z) does not vanish within tol_rel * coefficient scale.
MatrixPencil divide_right(const MatrixPencil& p, const Matrix& Z, double tol_rel = 1e-8);

// Linear factors [Y_1 .. Y_d] with P(z) = (z*I - Y_d) ... (z*I - Y_1),
// spec(Y_j) in the j-th zone closure, lowest zone extracted first as the
// rightmost factor.
std::vector<Matrix> factorize(const MatrixPencil& p);

// Block Vandermonde with block rows I, Z_j, ..., Z_j^{d-1}.
Matrix vandermonde(const std::vector<Matrix>& roots);

}  // namespace specband
