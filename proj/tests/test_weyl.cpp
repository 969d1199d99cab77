#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "specband/errors.hpp"
#include "specband/weyl.hpp"
#include "test_helpers.hpp"

using namespace specband;

TEST_SUITE("weyl_evaluation") {

TEST_CASE("half-line values on the band need a boundary choice") {
  const WeylEvaluator ev(testutil::build_canonical());
  CHECK_THROWS_AS(ev.half_line({3.0, 0.0}, HalfLine::Plus), AtSingularPoint);
  CHECK_THROWS_AS(ev.half_line({1.5, 0.0}, HalfLine::Plus), AtSingularPoint);  // at mu

  // oracle: M_pm(3) = (pm i sqrt(6) - sqrt(0.375)) / 1.5 from the closed form
  const cplx mplus = ev.half_line({3.0, 0.0}, HalfLine::Plus, BoundaryValue::Upper)(0, 0);
  const cplx mminus = ev.half_line({3.0, 0.0}, HalfLine::Minus, BoundaryValue::Upper)(0, 0);
  const cplx oracle_p = (cplx(0, 1) * std::sqrt(6.0) - std::sqrt(0.375)) / 1.5;
  const cplx oracle_m = (cplx(0, -1) * std::sqrt(6.0) - std::sqrt(0.375)) / 1.5;
  CHECK(std::abs(mplus - oracle_p) < 1e-12);
  CHECK(std::abs(mminus - oracle_m) < 1e-12);
}

TEST_CASE("herglotz signs and high-energy behavior") {
  const WeylEvaluator ev(testutil::build_canonical());
  const Matrix mp = ev.half_line({0.0, 1.0}, HalfLine::Plus);
  const Matrix mn = ev.half_line({0.0, 1.0}, HalfLine::Minus);
  CHECK(min_eigenvalue(imag_part(mp)) > 0.0);
  CHECK(min_eigenvalue(imag_part(Matrix(-mn))) > 0.0);

  const cplx zbig(0.0, 1e6);
  const cplx root = std::sqrt(zbig);  // principal: Im > 0
  const Matrix big_p = ev.half_line(zbig, HalfLine::Plus);
  const Matrix big_m = ev.half_line(zbig, HalfLine::Minus);
  CHECK(std::abs(big_p(0, 0) - cplx(0, 1) * root) / std::abs(root) < 1e-2);
  CHECK(std::abs(big_m(0, 0) + cplx(0, 1) * root) / std::abs(root) < 1e-2);
}

TEST_CASE("full matrix: routes agree, symmetry, gap block") {
  const WeylEvaluator ev(testutil::build_canonical());
  const cplx z(0.0, 1.0);
  const Matrix full = ev.full(z);
  CHECK(ev.route_residual(z) <= 1e-9 * ev.scale(z));

  // M(conj z)^* = M(z)
  const Matrix reflected = ev.full(std::conj(z)).adjoint();
  CHECK(max_abs(Matrix(reflected - full)) < 1e-12);

  // (2,2) block equals (i/2) R^{-1/2} F = (M_- - M_+)^{-1}
  const Matrix mp = ev.half_line(z, HalfLine::Plus);
  const Matrix mn = ev.half_line(z, HalfLine::Minus);
  const cplx expect = 1.0 / (mn(0, 0) - mp(0, 0));
  CHECK(std::abs(full(1, 1) - expect) < 1e-12);
  const cplx g = cplx(0, 0.5) / ev.data().bs.eval_sqrt_r(z) * ev.data().f.eval(z)(0, 0);
  CHECK(std::abs(full(1, 1) - g) < 1e-12);
}

TEST_CASE("spectral density values and rank") {
  const WeylEvaluator ev(testutil::build_canonical());

  // oracle at lambda = 3: (1 / (2 pi sqrt 6)) [[H(3), -Gamma], [-Gamma, F(3)]]
  const auto d3 = ev.spectral_density(3.0);
  REQUIRE(d3.inside);
  const double w = 1.0 / (2.0 * M_PI * std::sqrt(6.0));
  const double h3 = 9.0 - 4.5 - 0.25;
  CHECK(d3.value(0, 0).real() == doctest::Approx(w * h3).epsilon(1e-12));
  CHECK(d3.value(0, 1).real() == doctest::Approx(-w * std::sqrt(0.375)).epsilon(1e-12));
  CHECK(d3.value(1, 1).real() == doctest::Approx(w * 1.5).epsilon(1e-12));
  CHECK(min_eigenvalue(d3.value) > 0.0);
  // det relation: det = R3(3) * w^2 through F H - G2^2 = R I
  const double det = (d3.value(0, 0) * d3.value(1, 1) - d3.value(0, 1) * d3.value(1, 0)).real();
  CHECK(det == doctest::Approx(6.0 * w * w).epsilon(1e-10));

  // zero with flag in the gap
  const auto dgap = ev.spectral_density(1.5);
  CHECK_FALSE(dgap.inside);
  CHECK(max_abs(dgap.value) == 0.0);

  // maximal multiplicity: 2m positive eigenvalues inside the first band
  const auto d05 = ev.spectral_density(0.5);
  REQUIRE(d05.inside);
  Eigen::SelfAdjointEigenSolver<Matrix> es(d05.value);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("stieltjes inversion limit decays at least linearly in eps") {
  const WeylEvaluator ev(testutil::build_canonical());
  // For real-coefficient instances the first-order boundary term is purely
  // imaginary and drops out of the matrix imaginary part, so the decay is
  // one order faster than the generic linear rate.
  const double r4 = ev.stieltjes_residual(0.5, 1e-4);
  const double r5 = ev.stieltjes_residual(0.5, 1e-5);
  CHECK(r4 / r5 >= 8.0);
  CHECK(r4 / r5 == doctest::Approx(100.0).epsilon(0.1));

  CHECK(ev.stieltjes_residual(3.0, 1e-6) <= 1e-4);

  // in the gap the density is zero and the boundary imaginary part fades
  CHECK(ev.stieltjes_residual(1.5, 1e-5) <= 1e-3);
  CHECK(ev.stieltjes_residual(1.5, 1e-5) / ev.stieltjes_residual(1.5, 1e-4) ==
        doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("reflectionless boundary matching at the anchor") {
  const WeylEvaluator ev(testutil::build_canonical());
  for (double eps : {1e-4, 1e-5}) {
    const Matrix up = ev.half_line({0.5, eps}, HalfLine::Plus);
    const Matrix dn = ev.half_line({0.5, -eps}, HalfLine::Minus);
    CHECK(max_abs(Matrix(up - dn)) <= 20.0 * eps);
  }
  // negative control in the gap: the two differ by 2i R^{1/2} F^{-1}
  const Matrix up = ev.half_line({1.4, 1e-6}, HalfLine::Plus);
  const Matrix dn = ev.half_line({1.4, -1e-6}, HalfLine::Minus);
  const cplx gap_jump = 2.0 * cplx(0, 1) * ev.data().bs.eval_sqrt_r({1.4, 0.0}) /
                        ev.data().f.eval({1.4, 0.0})(0, 0);
  CHECK(std::abs((up - dn)(0, 0) - gap_jump) < 1e-4 * std::abs(gap_jump));
}

TEST_CASE("2x2 evaluator passes the same battery") {
  const WeylEvaluator ev(testutil::build_diagonal_2x2());
  const cplx z(0.7, 0.9);
  CHECK(ev.route_residual(z) <= 1e-9 * ev.scale(z));
  const Matrix mp = ev.half_line(z, HalfLine::Plus);
  CHECK(min_eigenvalue(imag_part(mp)) > 0.0);
  const auto d = ev.spectral_density(0.5);
  REQUIRE(d.inside);
  CHECK(min_eigenvalue(d.value) > 0.0);
  CHECK(d.value.rows() == 4);
}

TEST_CASE("evaluator cache is safe under concurrent queries") {
  const WeylEvaluator ev(testutil::build_canonical());
  std::vector<cplx> zs;
  for (int i = 0; i < 32; ++i) zs.emplace_back(0.2 + 0.05 * i, 0.4 + 0.03 * i);
  std::vector<Matrix> expected;
  for (cplx z : zs) expected.push_back(ev.full(z));

  std::atomic<int> mismatches{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&] {
      for (int rep = 0; rep < 20; ++rep) {
        for (std::size_t i = 0; i < zs.size(); ++i) {
          if (max_abs(Matrix(ev.full(zs[i]) - expected[i])) != 0.0) ++mismatches;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(mismatches.load() == 0);
}

}  // TEST_SUITE
