#include <doctest.h>

#include <cmath>

#include "core/sturm_liouville.hpp"

using namespace rdstab;

namespace {

OperatorSpec sec5_spec(int grid = 2001) {
  return make_operator_spec(M_PI / 2, 0.0, Coefficient::constant(1.0),
                            Coefficient::constant(-3.0), grid);
}

OperatorSpec variable_spec(int grid = 801) {
  return make_operator_spec(M_PI / 3, M_PI / 4, Coefficient::parse("poly(1, 0, 0.5)"),
                            Coefficient::parse("poly(-3, 1)"), grid);
}

}  // namespace

TEST_CASE("closed form eigenpairs for the Neumann-Dirichlet constant plant") {
  OperatorSpec spec = sec5_spec(401);
  SpectralBasis b = closed_form_basis(spec, 5, 401);
  const double pi = M_PI;
  CHECK(b.lambdas[0] == doctest::Approx(pi * pi / 4 + 1).epsilon(1e-13));
  CHECK(b.lambdas[1] == doctest::Approx(9 * pi * pi / 4 + 1).epsilon(1e-13));
  CHECK(b.phi0[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  for (int n = 1; n <= 5; ++n) {
    double expect = -std::sqrt(2.0) * ((n % 2 == 1) ? 1.0 : -1.0) * (2 * n - 1) * pi / 2;
    CHECK(b.dphi1[n - 1] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(b.phi1[n - 1]) < 1e-12);
  }
}

TEST_CASE("shifting q shifts eigenvalues, eigenfunctions unchanged") {
  OperatorSpec spec = sec5_spec(401);
  OperatorSpec shifted = spec;
  shifted.q = spec.q.shifted(2.5);
  shifted.q_c = spec.q_c + 2.5;
  shifted.q_hi = spec.q_hi + 2.5;
  shifted.validate();
  SpectralBasis a = closed_form_basis(spec, 6, 401);
  SpectralBasis b = closed_form_basis(shifted, 6, 401);
  for (int n = 0; n < 6; ++n) {
    CHECK(b.lambdas[n] - a.lambdas[n] == doctest::Approx(2.5).epsilon(1e-13));
    CHECK((a.samples.col(n) - b.samples.col(n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("numeric eigensolve matches closed form after extrapolation") {
  OperatorSpec spec = sec5_spec(501);
  SpectralBasis num = solve_eigenproblem(spec, 12);
  SpectralBasis cf = closed_form_basis(spec, 12, 501);
  for (int n = 0; n < 12; ++n) {
    CHECK(std::abs(num.lambdas[n] - cf.lambdas[n]) / cf.lambdas[n] < 1e-8);
    CHECK(std::abs(num.phi0[n] - cf.phi0[n]) < 1e-7);
    CHECK(std::abs(num.dphi1[n] - cf.dphi1[n]) / std::abs(cf.dphi1[n]) < 1e-7);
  }
}

TEST_CASE("general Robin angles agree with the characteristic equation") {
  OperatorSpec spec = make_operator_spec(M_PI / 3, M_PI / 4, Coefficient::constant(2.0),
                                         Coefficient::constant(-1.0), 401);
  SpectralBasis num = solve_eigenproblem(spec, 6);
  SpectralBasis cf = closed_form_basis(spec, 6, 401);
  for (int n = 0; n < 6; ++n)
    CHECK(std::abs(num.lambdas[n] - cf.lambdas[n]) / cf.lambdas[n] < 1e-8);
}

TEST_CASE("verify_basis") {
  OperatorSpec spec = sec5_spec(501);

  SUBCASE("closed form passes with tiny residuals") {
    SpectralBasis cf = closed_form_basis(spec, 10, 501);
    BasisDiagnostics d = verify_basis(cf, spec);
    CHECK(d.pass);
    CHECK(d.eigen_residual.maxCoeff() < 1e-12);
  }

  SUBCASE("reordered eigenvalues are flagged") {
    SpectralBasis cf = closed_form_basis(spec, 4, 501);
    std::swap(cf.lambdas[1], cf.lambdas[2]);
    BasisDiagnostics d = verify_basis(cf, spec);
    CHECK_FALSE(d.monotone_ok);
    CHECK_FALSE(d.pass);
  }

  SUBCASE("numeric residual decreases under refinement") {
    SpectralBasis c1 = solve_eigenproblem(sec5_spec(251), 6);
    SpectralBasis c2 = solve_eigenproblem(sec5_spec(501), 6);
    double r1 = verify_basis(c1, sec5_spec(251)).eigen_residual.maxCoeff();
    double r2 = verify_basis(c2, sec5_spec(501)).eigen_residual.maxCoeff();
    CHECK(r2 < r1);
    CHECK(r1 / r2 > 2.0);  // second-order scheme: about 4x
  }
}

TEST_CASE("gram matrix is identity in the discrete inner product") {
  OperatorSpec spec = sec5_spec(501);
  SpectralBasis num = solve_eigenproblem(spec, 10);
  Eigen::MatrixXd G =
      num.samples.transpose() * num.weights.asDiagonal() * num.samples;
  CHECK((G - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("variable coefficients: bracket, diagnostics, trace boundedness") {
  OperatorSpec spec = variable_spec(801);
  SpectralBasis b = solve_eigenproblem(spec, 30);
  BasisDiagnostics d = verify_basis(b, spec);
  CHECK(d.bracket_ok);
  CHECK(d.monotone_ok);
  CHECK(d.gram_ok);
  // trace growth bounds
  double phi0_ref = std::abs(b.phi0[0]);
  double dphi_ref = std::abs(b.dphi1[0]) / std::sqrt(b.lambdas[0]);
  for (int n = 0; n < 30; ++n) {
    CHECK(std::abs(b.phi0[n]) <= 10.0 * phi0_ref);
    CHECK(std::abs(b.dphi1[n]) / std::sqrt(b.lambdas[n]) <= 10.0 * dphi_ref);
  }
}

TEST_CASE("trace boundedness on the constant plant") {
  OperatorSpec spec = sec5_spec(501);
  SpectralBasis b = solve_eigenproblem(spec, 30);
  double phi0_ref = std::abs(b.phi0[0]);
  double dphi_ref = std::abs(b.dphi1[0]) / std::sqrt(b.lambdas[0]);
  for (int n = 0; n < 30; ++n) {
    CHECK(std::abs(b.phi0[n]) <= 10.0 * phi0_ref);
    CHECK(std::abs(b.dphi1[n]) / std::sqrt(b.lambdas[n]) <= 10.0 * dphi_ref);
  }
}

TEST_CASE("spec validation rejects out-of-range angles") {
  CHECK_THROWS(make_operator_spec(0.0, 0.0, Coefficient::constant(1.0),
                                  Coefficient::constant(-3.0), 101));
  CHECK_THROWS(make_operator_spec(M_PI / 2, -0.1, Coefficient::constant(1.0),
                                  Coefficient::constant(-3.0), 101));
}
