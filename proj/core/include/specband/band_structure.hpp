#pragma once

#include <utility>
#include <vector>

#include "specband/types.hpp"

namespace specband {

// Prescribed spectrum: n finite bands [E_{2j}, E_{2j+1}] plus the half-line
// band [E_{2n}, inf), separated by the interior gaps (E_{2j-1}, E_{2j}) and
// the lower gap (-inf, E_0).
//
// eval_sqrt_r implements the square root of R(z) = prod_l (z - E_l) as
//
//     R^{1/2}(z) = |R(z)|^{1/2} * exp( (i/2) * sum_l arg(z - E_l) ),
//
// with every argument taken in [0, 2*pi).  This single closed form has its
// branch cuts exactly on the bands, is continuous across every gap, and on
// the real axis returns the boundary value from the upper half-plane:
//
//     lambda > E_{2n}                :  +|R|^{1/2}
//     lambda in band (E_{2j},E_{2j+1}):  (-1)^{n+j} |R|^{1/2}
//     lambda in gap (E_{2j-1},E_{2j}) :  (-1)^{n+j} i |R|^{1/2}
//     lambda < E_0                   :  (-1)^n i |R|^{1/2}
//
// together with the reflection rule conj(R^{1/2}(conj z)) = -R^{1/2}(z) on
// the upper half-plane.
class BandStructure {
 public:
  // Throws EvenEdgeCount unless the count is odd and >= 3, and
  // NonMonotoneEdges unless the edges are strictly increasing.
  explicit BandStructure(std::vector<double> edges);

  int n() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  double edge(int l) const { return edges_[static_cast<std::size_t>(l)]; }
  const std::vector<double>& edges() const { return edges_; }

  double span() const { return edges_.back() - edges_.front(); }
  double edge_sum() const;

  // Band j for j = 0..n-1 is [E_{2j}, E_{2j+1}]; band n is [E_{2n}, inf).
  std::pair<double, double> band(int j) const;
  // Gap j for j = 1..n is (E_{2j-1}, E_{2j}); gap 0 is (-inf, E_0).
  std::pair<double, double> gap(int j) const;

  bool in_band_interior(double lambda) const;
  bool in_gap_interior(double lambda) const;
  bool in_gap_closure(int j, double lambda, double tol = 0.0) const;
  // Index of the interior gap whose closure contains lambda, or -1.
  int gap_index(double lambda, double tol = 0.0) const;
  double distance_to_edges(double lambda) const;

  cplx eval_r(cplx z) const;
  // Branch-resolved square root described above.  On real points inside a
  // band this is the boundary value from the upper half-plane.
  cplx eval_sqrt_r(cplx z) const;
  // Boundary value from the lower half-plane at a real point.
  cplx eval_sqrt_r_lower(double lambda) const;

  // Informational flag for the on-band boundary-value convention.
  bool on_band_point(cplx z, double tol) const;

  // Ascending coefficients of R (degree 2n+1, leading coefficient 1).
  std::vector<double> r_coefficients() const;

 private:
  std::vector<double> edges_;
  int n_ = 0;
};

// Scalar expansion coefficients of prod_l (1 - E_l*eta)^{±1/2}:
//   chat_k from the -1/2 power, c_k from the +1/2 power,
//   with c_0 = chat_0 = 1 and the convolution inverse property
//   sum_{l<=k} chat_{k-l} c_l = delta_{k,0}.
struct EdgeSeries {
  int K = 0;
  std::vector<double> c;     // size K+1
  std::vector<double> chat;  // size K+1
};

// Computed by multiplying the 2n+1 per-edge binomial series.
EdgeSeries edge_series(const BandStructure& bs, int K);

// Same coefficients from the closed multinomial sums; kept as an
// independent route (the two must agree to rounding).
EdgeSeries edge_series_multinomial(const BandStructure& bs, int K);

}  // namespace specband
