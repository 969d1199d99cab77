#include <doctest.h>

#include <cmath>

#include "specband/errors.hpp"
#include "specband/operator_data.hpp"
#include "test_helpers.hpp"

using namespace specband;

TEST_SUITE("operator_builder") {

TEST_CASE("canonical scalar quadruple") {
  const OperatorData od = testutil::build_canonical();
  const testutil::CanonicalInstance ci;

  // G1 = G2 = constant sqrt(0.375)
  CHECK(od.g1.degree() == 0);
  CHECK(od.g1.coeff(0)(0, 0).real() == doctest::Approx(ci.gamma).epsilon(1e-12));
  CHECK(coeff_distance(od.g1, od.g2) < 1e-12);

  // H = z^2 - 1.5 z - 0.25, the synthetic-division oracle, to 1e-12
  REQUIRE(od.h.degree() == 2);
  for (int k = 0; k <= 2; ++k) {
    CHECK(std::abs(od.h.coeff(k)(0, 0).real() - ci.h_coeffs[static_cast<std::size_t>(k)]) <
          1e-12);
    CHECK(std::abs(od.h.coeff(k)(0, 0).imag()) < 1e-12);
  }

  // H F - G1^2 = R exactly as polynomials
  const MatrixPencil lhs = od.h * od.f - od.g1 * od.g1;
  CHECK(coeff_distance(lhs, r_pencil(od.bs, 1)) < 1e-12);
}

TEST_CASE("identity report flags perturbations and checks degrees") {
  OperatorData od = testutil::build_canonical();
  const auto samples = default_z_samples(od.bs);

  const QuadrupleReport good = verify_quadruple(od, samples);
  CHECK(good.degrees_ok);
  CHECK(good.max_residual() <= 1e-10 * good.scale);
  CHECK(good.pass(1e-10));

  // perturbing G1 by 1e-3 breaks (4.33) at first order: 2*Gamma*1e-3
  OperatorData bent = od;
  bent.g1.coeff(0)(0, 0) += 1e-3;
  const QuadrupleReport flagged = verify_quadruple(bent, samples);
  CHECK(flagged.hf > 1e-4);
  CHECK(flagged.hf == doctest::Approx(2.0 * std::sqrt(0.375) * 1e-3).epsilon(0.01));
  CHECK_FALSE(flagged.pass(1e-10));

  CHECK(od.h.is_monic(1e-12));
  CHECK(od.f.is_monic(1e-12));
  CHECK(od.h.degree() == od.n + 1);
  CHECK(od.g1.degree() <= std::max(0, od.n - 1));
}

TEST_CASE("diagonal quadruple equals two scalar runs") {
  const OperatorData diag = testutil::build_diagonal_2x2();

  BandStructure bs({0.0, 1.0, 2.0});
  const OperatorData s1 = build_quadruple(default_seed(bs, 1, {{1.25}}),
                                          extract_dirichlet(default_seed(bs, 1, {{1.25}}), bs), bs);
  const OperatorData s2 = build_quadruple(default_seed(bs, 1, {{1.75}}),
                                          extract_dirichlet(default_seed(bs, 1, {{1.75}}), bs), bs);

  for (int k = 0; k <= diag.h.degree(); ++k) {
    CHECK(std::abs(diag.h.coeff(k)(0, 0) - s1.h.coeff(k)(0, 0)) < 1e-11);
    CHECK(std::abs(diag.h.coeff(k)(1, 1) - s2.h.coeff(k)(0, 0)) < 1e-11);
    CHECK(std::abs(diag.h.coeff(k)(0, 1)) < 1e-12);
  }
  CHECK(std::abs(diag.g1.coeff(0)(0, 0) - s1.g1.coeff(0)(0, 0)) < 1e-11);
  CHECK(std::abs(diag.g1.coeff(0)(1, 1) - s2.g1.coeff(0)(0, 0)) < 1e-11);

  const QuadrupleReport rep = verify_quadruple(diag, default_z_samples(bs));
  CHECK(rep.pass(1e-10));
}

TEST_CASE("non-commuting two-gap quadruple satisfies the identities") {
  BandStructure bs({-2.0, -1.0, 0.0, 1.0, 2.0});
  const MatrixPencil f = testutil::build_noncommuting_seed();
  const DirichletSet ds = extract_dirichlet(f, bs);
  const OperatorData od = build_quadruple(f, ds, bs);
  const QuadrupleReport rep = verify_quadruple(od, default_z_samples(bs));
  CHECK(rep.degrees_ok);
  CHECK(rep.pass(1e-9));
  CHECK(od.h.degree() == 3);
  CHECK(od.g1.degree() == 1);
  // (4.30a): G2 is the coefficientwise adjoint of G1
  CHECK(coeff_distance(od.g2.conj_transpose(), od.g1) < 1e-9 * std::max(1.0, rep.scale));
}

TEST_CASE("inconsistent gap data is rejected at interpolation control") {
  const OperatorData od = testutil::build_canonical();
  DirichletSet broken = od.ds;
  broken.data[0].gamma(0, 0) *= 1.7;  // wrong residue weight
  CHECK_THROWS_AS(build_quadruple(od.f, broken, od.bs), ResidueNotCancelled);
}

}  // TEST_SUITE
