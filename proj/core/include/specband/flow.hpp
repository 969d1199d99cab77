#pragma once

#include <vector>

#include "specband/errors.hpp"
#include "specband/operator_data.hpp"

namespace specband {

// Full coefficient tuple at one x.  Coefficients carry the descending-power
// index of the pencils: F(z) = sum_l F[l] z^{n-l} with F[0] = H[0] = I.
struct FlowState {
  double x = 0.0;
  std::vector<Matrix> f;       // F_0 .. F_n
  std::vector<Matrix> g1, g2;  // G_{p,0} .. G_{p,n-1}
  std::vector<Matrix> h;       // H_0 .. H_{n+1}

  int n() const { return static_cast<int>(f.size()) - 1; }
  int m() const { return static_cast<int>(f.front().rows()); }

  Matrix potential() const { return f[1] - h[1]; }

  MatrixPencil f_pencil() const;
  MatrixPencil g1_pencil() const;
  MatrixPencil g2_pencil() const;
  MatrixPencil h_pencil() const;
};

FlowState state_from_operator_data(const OperatorData& od, double x0);
inline Matrix potential(const FlowState& s) { return s.potential(); }

// Right-hand side of the autonomous first-order system
//   F_l'  = -(G_{1,l-1} + G_{2,l-1})
//   G_{1,l}' = -Q F_{l+1} + F_{l+2} - H_{l+2}
//   G_{2,l}' = -F_{l+1} Q + F_{l+2} - H_{l+2}
//   H_l'  = G_{1,l-1} + G_{2,l-1} - G_{1,l-2} Q - Q G_{2,l-2}
// with Q = F_1 - H_1 and the conventions F_{n+1} = 0, G_{p,n} = G_{p,-1} = 0.
FlowState flow_derivative(const FlowState& s);

struct PropagationConfig {
  double h = 1e-3;                  // integrator substep
  double drift_abort_rel = 1e-6;    // abort threshold on invariant drift
  bool adaptive = false;            // step-doubling error control
  double adaptive_tol = 1e-11;
  std::vector<cplx> drift_samples;  // z points monitored; default derived from bs
};

struct Trajectory {
  std::vector<double> grid;
  std::vector<FlowState> states;
  double h = 0.0;
  std::vector<double> drift;  // per-node max invariant residual
  double dx() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

class DriftExceededError : public Error {
 public:
  DriftExceededError(const std::string& what, Trajectory partial)
      : Error(what), partial_trajectory(std::move(partial)) {}
  Trajectory partial_trajectory;
};

// Classical fixed-step order-4 integration with post-step re-Hermitization;
// negative direction runs with negative steps.  Throws DriftExceededError
// carrying the completed nodes.
Trajectory propagate(const FlowState& s0, const std::vector<double>& x_grid,
                     const BandStructure& bs, const PropagationConfig& cfg);

struct FlowInvariantReport {
  double sym = 0.0;         // coefficientwise Hermiticity / adjoint pairing
  double commute_fg = 0.0;  // F G1 - G2 F
  double commute_hg = 0.0;  // H G2 - G1 H
  double hf = 0.0;          // H F - G1^2 - R I
  double fh = 0.0;          // F H - G2^2 - R I
  double scale = 1.0;
  double max_residual() const;
};

// Residuals of the five conserved pencil identities at a state.
FlowInvariantReport invariant_residuals(const FlowState& s, const BandStructure& bs,
                                        const std::vector<cplx>& z_samples);

struct RiccatiResidual {
  std::vector<double> x;      // interior nodes
  std::vector<double> plus;   // ||dM_+/dx + M_+^2 - (Q - z)|| per node
  std::vector<double> minus;
  double max_residual() const;
};

RiccatiResidual riccati_residual(const Trajectory& traj, const BandStructure& bs, cplx z);

// || M_+(lambda + i eps, x) - M_-(lambda - i eps, x) || per node; O(eps)
// inside a band, bounded away from zero inside a gap.
std::vector<double> reflectionless_residual(const Trajectory& traj, const BandStructure& bs,
                                            double lambda, double eps);

struct LaxResidual {
  std::vector<double> x;             // nodes with two-sided second differences
  std::vector<double> first_order;   // G2' - (-F'' + QF - FQ)/2
  std::vector<double> second_order;  // G2'' + 2F'(Q - z) + FQ' - QG2 + G2Q
  double max_residual() const;
};

// Finite-difference certificate of the commutator identities behind the
// vanishing Lax bracket, evaluated at the z samples.
LaxResidual lax_residual(const Trajectory& traj, const std::vector<cplx>& z_samples);

}  // namespace specband
