#pragma once

#include <vector>

#include "specband/band_structure.hpp"
#include "specband/matrix_pencil.hpp"
#include "specband/pencil_spectral.hpp"

namespace specband {

// One gap datum: location mu in a gap closure, positive semidefinite
// residue weight gamma of i R^{1/2} F^{-1}, and the half-line sign.
struct DirichletDatum {
  double mu = 0.0;
  Matrix gamma;
  int rank = 0;
  int epsilon = 1;
  int gap_index = -1;
  bool at_band_edge = false;  // R(mu) ~ 0; gamma zeroed with this flag
};

struct DirichletSet {
  std::vector<DirichletDatum> data;
  Matrix gamma0;  // Hermitian constant term of the large-z expansion
  int count() const { return static_cast<int>(data.size()); }
  int total_rank() const;
};

// Diagonal monic seed pencil: entry (r, r) is prod_j (z - placement[j][r]),
// one placement per interior gap and per diagonal entry.  Throws
// PlacementOutsideGap.
MatrixPencil default_seed(const BandStructure& bs, int m,
                          const std::vector<std::vector<double>>& placement);

struct HerglotzSeedReport {
  bool pass = false;
  double worst_imag_eig = 0.0;  // most negative eigenvalue of Im((i/2) R^{-1/2} F)
  cplx worst_z;
  bool roots_in_gaps = false;
  std::vector<PencilRoot> roots;
};

// Checks the Herglotz property of (i/2) R^{-1/2} F at the samples and the
// gap confinement of the spectrum of F.
HerglotzSeedReport verify_herglotz_seed(const MatrixPencil& f, const BandStructure& bs,
                                        const std::vector<cplx>& samples, double tol = 1e-10);

// Residue extraction at the roots of det F.  epsilons may be empty (all +1)
// or one sign per root cluster in ascending mu order.  Throws DefectiveRoot
// and NegativeGamma.
DirichletSet extract_dirichlet(const MatrixPencil& f, const BandStructure& bs,
                               const std::vector<int>& epsilons = {});

// A default set of upper half-plane sample points spread over the edge span.
std::vector<cplx> default_herglotz_samples(const BandStructure& bs);

}  // namespace specband
