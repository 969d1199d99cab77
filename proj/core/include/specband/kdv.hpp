#pragma once

#include <vector>

#include "specband/band_structure.hpp"
#include "specband/flow.hpp"

namespace specband {

enum class SeriesRoute { Pencil, Extension, Explicit, MExpansion };

// Expansion coefficients R-hat_k, G-hat_{p,k}, H-hat_k at one node, with
// R-hat_0 = H-hat_0 = I and G-hat_{p,0} = 0.
struct InvariantSeries {
  int K = 0;
  std::vector<Matrix> rhat;                // 0..K
  std::vector<Matrix> ghat1, ghat2;        // 0..ghat_count-1
  std::vector<Matrix> hhat;                // 0..K
  std::vector<SeriesRoute> rhat_route, hhat_route;
  int ghat_count = 0;
};

// Linear-map route: convolution with the chat series up to the pencil
// degrees, then the rearranged vanishing identities extend R-hat and H-hat
// to order K.
InvariantSeries series_from_state(const FlowState& s, const EdgeSeries& es, int K);

// Differential-polynomial route for the low orders, from a potential grid:
//   R-hat_1 = Q/2                    H-hat_1 = -Q/2
//   R-hat_2 = -Q''/8 + 3 Q^2/8       H-hat_2 = Q''/8 - Q^2/8
//   G-hat_{p,1} = -Q'/4
//   G-hat_{1,2} = Q'''/16 - (Q^2)'/8 - Q' Q/8   (G-hat_{2,2} with Q Q'/8)
// Derivatives by central differences; entries valid on nodes [lo, hi].
struct ExplicitSeries {
  std::vector<Matrix> rhat1, rhat2;
  std::vector<Matrix> ghat11, ghat12, ghat21, ghat22;
  std::vector<Matrix> hhat1, hhat2;
  int lo = 0, hi = 0;
};
ExplicitSeries explicit_low_order(const std::vector<Matrix>& q_grid, double dx);

// High-energy expansion coefficients of the half-line matrices,
//   M_{pm,1} = -+ i Q/2,  M_{pm,2} = Q'/4,
//   M_{pm,k+1} = pm (i/2) (M_{pm,k}' + sum_{l=1}^{k-1} M_{pm,l} M_{pm,k-l}).
// plus[k-1][i] holds M_{+,k} at node i; valid on [lo, hi].
struct MExpansion {
  std::vector<std::vector<Matrix>> plus, minus;
  int K = 0;
  int lo = 0, hi = 0;
};
MExpansion m_expansion_recursion(const std::vector<Matrix>& q_grid, double dx, int K);

// Third route: formal inversion of the w-series of M_- - M_+ (w = z^{-1/2});
// the even w-coefficients of the inverse are (i/2) rhat_k.  Returns
// rhat[k][node] for k = 0..kmax, valid on the expansion's [lo, hi].
std::vector<std::vector<Matrix>> rhat_from_m_expansion(const MExpansion& me, int kmax);

struct TraceReport {
  double x = 0.0;
  std::vector<Matrix> u_roots;            // U_1 .. U_n from F
  std::vector<Matrix> v_roots;            // V_0 .. V_n from H
  std::vector<double> f_resid;            // k = 1..n ordered symmetric sums vs series
  std::vector<double> h_resid;            // k = 1..n+1
  std::vector<double> f_resid_reversed;   // opposite product order, informational
  double q_from_u = 0.0;  // || Q - ((sum E) I - 2 sum U_j) ||
  double q_from_v = 0.0;  // || Q - (-(sum E) I + 2 sum V_k) ||
  bool zones_confined = false;
  double zone_margin = 0.0;  // worst eigenvalue excursion past its interval
  double scale = 1.0;
};

// Factorizes F and H at the node and evaluates the trace identities.
TraceReport trace_formulas(const FlowState& s, const BandStructure& bs, const EdgeSeries& es);

// Stationary-hierarchy residual per node:
//   || -2 sum_{l=0}^n c_{n-l} d/dx R-hat_{l+1} ||
// with the low orders from the differential-polynomial route and the rest
// from the pencil series; central differences in x.  Valid nodes start at
// index 2 and end 2 short of the grid.
struct SkdvResidual {
  std::vector<double> x;
  std::vector<double> residual;
  double max_residual() const;
};
SkdvResidual skdv_residual(const Trajectory& traj, const EdgeSeries& es);

// || F(z1) F(z2) - F(z2) F(z1) || in the Frobenius norm; zero exactly for
// every scalar or diagonal pencil, positive for genuinely non-commuting
// coefficient families.
double nonabelian_probe(const MatrixPencil& f, cplx z1, cplx z2);

}  // namespace specband
