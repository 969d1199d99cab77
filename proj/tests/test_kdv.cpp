#include <doctest.h>

#include <cmath>

#include "specband/errors.hpp"
#include "specband/kdv.hpp"
#include "test_helpers.hpp"

using namespace specband;

namespace {

struct CanonicalFlow {
  OperatorData od = testutil::build_canonical();
  EdgeSeries es = edge_series(od.bs, 6);
  Trajectory traj = testutil::centered_trajectory(od, 0.0, 100, 1e-3, 1e-3);
  int center = 100;
};

std::vector<Matrix> potentials(const Trajectory& t) {
  std::vector<Matrix> q;
  q.reserve(t.states.size());
  for (const FlowState& s : t.states) q.push_back(s.potential());
  return q;
}

}  // namespace

TEST_SUITE("kdv_invariants") {

TEST_CASE("pencil-route series at the anchor") {
  const OperatorData od = testutil::build_canonical();
  const EdgeSeries es = edge_series(od.bs, 6);
  const FlowState s = state_from_operator_data(od, 0.0);
  const InvariantSeries iv = series_from_state(s, es, 4);

  CHECK(max_abs(Matrix(iv.rhat[0] - Matrix::Identity(1, 1))) < 1e-14);
  CHECK(max_abs(Matrix(iv.hhat[0] - Matrix::Identity(1, 1))) < 1e-14);
  // chat_1 F_0 + F_1 = 1.5 - 1.5 = 0, and Q/2 = 0
  CHECK(max_abs(iv.rhat[1]) < 1e-10);
  // extension: rhat_2 = -c_2 - c_1 rhat_1 = 0.125
  CHECK(iv.rhat[2](0, 0).real() == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(iv.rhat_route[2] == SeriesRoute::Extension);
  // hhat_1 = chat_1 + H_1 = 0 and hhat_2 = chat_2 + chat_1 H_1 + H_2 = -0.125
  CHECK(max_abs(iv.hhat[1]) < 1e-10);
  CHECK(iv.hhat[2](0, 0).real() == doctest::Approx(-0.125).epsilon(1e-10));
  // ghat_{p,1} = G_{p,0} = sqrt(0.375)
  CHECK(iv.ghat1[1](0, 0).real() == doctest::Approx(std::sqrt(0.375)).epsilon(1e-10));
  CHECK(max_abs(iv.ghat1[0]) == 0.0);
}

TEST_CASE("explicit differential polynomials cross-check the pencil route") {
  CanonicalFlow cf;
  const auto q = potentials(cf.traj);
  const ExplicitSeries ex = explicit_low_order(q, cf.traj.dx());

  // at the center node: rhat_2 = -Q''/8 + 3 Q^2/8 with Q(x0) = 0 forces
  // Q''(x0) = -1 through the cross-route value 0.125
  const std::size_t c = static_cast<std::size_t>(cf.center);
  CHECK(ex.rhat2[c](0, 0).real() == doctest::Approx(0.125).epsilon(5e-4));
  CHECK(max_abs(ex.rhat1[c]) < 1e-6);

  // against the pencil series at every interior node
  for (int i = ex.lo; i <= ex.hi; i += 5) {
    const InvariantSeries ps = series_from_state(cf.traj.states[static_cast<std::size_t>(i)],
                                                 cf.es, 2);
    const std::size_t ui = static_cast<std::size_t>(i);
    CHECK(max_abs(Matrix(ps.rhat[1] - ex.rhat1[ui])) < 1e-6);
    CHECK(max_abs(Matrix(ps.rhat[2] - ex.rhat2[ui])) < 1e-5);
    CHECK(max_abs(Matrix(ps.hhat[1] - ex.hhat1[ui])) < 1e-6);
    CHECK(max_abs(Matrix(ps.hhat[2] - ex.hhat2[ui])) < 1e-5);
    CHECK(max_abs(Matrix(ps.ghat1[1] - ex.ghat11[ui])) < 1e-6);
  }
}

TEST_CASE("explicit route on a frozen constant potential") {
  // not a flow: a constant diagonal Q has rhat_2 = 3 Q^2 / 8 exactly
  Matrix q0 = Matrix::Zero(2, 2);
  q0(0, 0) = 0.7;
  q0(1, 1) = -0.4;
  std::vector<Matrix> grid(9, q0);
  const ExplicitSeries ex = explicit_low_order(grid, 0.1);
  const Matrix expect = 0.375 * q0 * q0;
  for (int i = ex.lo; i <= ex.hi; ++i) {
    CHECK(max_abs(Matrix(ex.rhat2[static_cast<std::size_t>(i)] - expect)) < 1e-13);
    CHECK(max_abs(ex.ghat11[static_cast<std::size_t>(i)]) < 1e-13);
  }
  CHECK_THROWS_AS(explicit_low_order(std::vector<Matrix>(3, q0), 0.1), GridTooCoarse);
}

TEST_CASE("hermitian potentials give adjoint-paired ghat entries") {
  CanonicalFlow cf;
  const OperatorData od2 = testutil::build_diagonal_2x2();
  const Trajectory t2 = testutil::centered_trajectory(od2, 0.0, 10, 1e-3, 1e-3);
  const ExplicitSeries ex = explicit_low_order(potentials(t2), t2.dx());
  for (int i = ex.lo; i <= ex.hi; ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    CHECK(max_abs(Matrix(ex.ghat21[ui] - ex.ghat11[ui].adjoint())) < 1e-12);
    CHECK(max_abs(Matrix(ex.ghat22[ui] - ex.ghat12[ui].adjoint())) < 1e-12);
  }
}

TEST_CASE("high-energy expansion coefficients at the anchor") {
  CanonicalFlow cf;
  const auto q = potentials(cf.traj);
  const MExpansion me = m_expansion_recursion(q, cf.traj.dx(), 4);
  const std::size_t c = static_cast<std::size_t>(cf.center);
  // M_{pm,1} = -+ (i/2) Q with Q(x0) = 0
  CHECK(max_abs(me.plus[0][c]) < 1e-6);
  // M_{pm,2} = Q'/4 = -2 mu' / 4 = -sqrt(0.375) / ... = -0.6123724
  CHECK(me.plus[1][c](0, 0).real() == doctest::Approx(-std::sqrt(0.375)).epsilon(1e-5));
  CHECK(me.minus[1][c](0, 0).real() == doctest::Approx(-std::sqrt(0.375)).epsilon(1e-5));

  CHECK_THROWS_AS(m_expansion_recursion(std::vector<Matrix>(5, q[0]), 1e-3, 4), GridTooCoarse);
}

TEST_CASE("series inversion of the expansion matches the pencil route") {
  CanonicalFlow cf;
  const auto q = potentials(cf.traj);
  const MExpansion me = m_expansion_recursion(q, cf.traj.dx(), 4);
  const auto rhat = rhat_from_m_expansion(me, 2);
  for (int i = me.lo; i <= me.hi; i += 10) {
    const std::size_t ui = static_cast<std::size_t>(i);
    const InvariantSeries ps = series_from_state(cf.traj.states[ui], cf.es, 2);
    CHECK(max_abs(Matrix(rhat[0][ui] - Matrix::Identity(1, 1))) < 1e-10);
    CHECK(max_abs(Matrix(rhat[1][ui] - ps.rhat[1])) < 1e-5);
    CHECK(max_abs(Matrix(rhat[2][ui] - ps.rhat[2])) < 1e-4);
  }
}

TEST_CASE("trace formulas at the anchor") {
  const OperatorData od = testutil::build_canonical();
  const EdgeSeries es = edge_series(od.bs, 6);
  const FlowState s = state_from_operator_data(od, 0.0);
  const TraceReport tr = trace_formulas(s, od.bs, es);

  REQUIRE(tr.u_roots.size() == 1);
  REQUIRE(tr.v_roots.size() == 2);
  const testutil::CanonicalInstance ci;
  CHECK(tr.u_roots[0](0, 0).real() == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(tr.v_roots[0](0, 0).real() == doctest::Approx(ci.h_root_low).epsilon(1e-8));
  CHECK(tr.v_roots[1](0, 0).real() == doctest::Approx(ci.h_root_high).epsilon(1e-8));
  CHECK(ci.h_root_low == doctest::Approx(-0.1513878).epsilon(1e-6));
  CHECK(ci.h_root_high == doctest::Approx(1.6513878).epsilon(1e-6));

  CHECK(tr.zones_confined);
  CHECK(tr.q_from_u <= 1e-9);
  CHECK(tr.q_from_v <= 1e-9);
  for (double v : tr.f_resid) CHECK(v <= 1e-9);
  for (double v : tr.h_resid) CHECK(v <= 1e-9);

  // k = 1 sign bookkeeping: -U_1 = c_1 rhat_0 + rhat_1 = -1.5
  const InvariantSeries iv = series_from_state(s, es, 2);
  CHECK((-tr.u_roots[0](0, 0) - (es.c[1] + iv.rhat[1](0, 0))).real() ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("trace formulas hold along the trajectory") {
  CanonicalFlow cf;
  for (std::size_t i = 0; i < cf.traj.states.size(); i += 20) {
    const TraceReport tr = trace_formulas(cf.traj.states[i], cf.od.bs, cf.es);
    CHECK(tr.zones_confined);
    CHECK(std::max(tr.q_from_u, tr.q_from_v) <= 1e-8 * tr.scale);
    for (double v : tr.f_resid) CHECK(v <= 1e-8 * tr.scale);
    for (double v : tr.h_resid) CHECK(v <= 1e-8 * tr.scale);
    // scalar data commute, so the reversed product order agrees too
    for (double v : tr.f_resid_reversed) CHECK(v <= 1e-8 * tr.scale);
  }
}

TEST_CASE("stationary hierarchy residual decays at order two") {
  CanonicalFlow cf;
  const SkdvResidual fine = skdv_residual(cf.traj, cf.es);
  const double scale = invariant_residuals(cf.traj.states.front(), cf.od.bs, {}).scale;
  CHECK(fine.max_residual() <= 1e-5 * scale);

  const Trajectory half = testutil::subsample(cf.traj, 2);
  const SkdvResidual coarse = skdv_residual(half, cf.es);
  CHECK(coarse.max_residual() / fine.max_residual() == doctest::Approx(4.0).epsilon(0.2));

  // n = 1 unfolding: the residual is the discrete derivative of
  // c_1 Q/2 + (-Q''/8 + 3 Q^2/8) up to the factor -2
  const auto q = potentials(cf.traj);
  const ExplicitSeries ex = explicit_low_order(q, cf.traj.dx());
  std::vector<Matrix> combo(q.size(), Matrix::Zero(1, 1));
  for (int i = ex.lo; i <= ex.hi; ++i) {
    combo[static_cast<std::size_t>(i)] =
        cf.es.c[1] * ex.rhat1[static_cast<std::size_t>(i)] + ex.rhat2[static_cast<std::size_t>(i)];
  }
  const double dx = cf.traj.dx();
  for (std::size_t k = 0; k < fine.x.size(); k += 25) {
    const std::size_t i = k + 3;  // skdv interior offset
    const Matrix direct = -2.0 * (combo[i + 1] - combo[i - 1]) / (2.0 * dx);
    CHECK(std::abs(direct(0, 0).real() - 0.0) ==
          doctest::Approx(fine.residual[k]).epsilon(1e-10));
  }
}

TEST_CASE("diagonal seeds reduce the hierarchy entrywise") {
  const OperatorData od = testutil::build_diagonal_2x2();
  const EdgeSeries es = edge_series(od.bs, 6);
  const Trajectory t = testutil::centered_trajectory(od, 0.0, 50, 1e-3, 1e-3);
  const SkdvResidual r = skdv_residual(t, es);
  const double scale = invariant_residuals(t.states.front(), od.bs, {}).scale;
  CHECK(r.max_residual() <= 1e-5 * scale);
}

TEST_CASE("non-abelian witness") {
  // diagonal pencils commute at any pair of points
  const OperatorData diag = testutil::build_diagonal_2x2();
  CHECK(nonabelian_probe(diag.f, {0.0, 1.0}, {0.0, 2.0}) <= 1e-12);
  // scalars always commute
  const OperatorData scalar = testutil::build_canonical();
  CHECK(nonabelian_probe(scalar.f, {0.3, 0.7}, {-1.0, 2.0}) == 0.0);

  // explicit 2x2 oracle: F = q(z) I + eps (z sx + sz) gives
  // [F(z1), F(z2)] = eps^2 (z1 - z2) [sx, sz], Frobenius norm
  // eps^2 |z1 - z2| * 2 sqrt(2)
  const MatrixPencil f = testutil::build_noncommuting_seed(0.3);
  const cplx z1(0.0, 1.0), z2(0.0, 2.0);
  const double oracle = 0.09 * std::abs(z1 - z2) * 2.0 * std::sqrt(2.0);
  CHECK(nonabelian_probe(f, z1, z2) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(nonabelian_probe(f, z1, z2) > 0.1);
}

}  // TEST_SUITE
