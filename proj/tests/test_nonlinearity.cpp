#include <doctest.h>

#include <cmath>

#include "core/sector_nonlinearity.hpp"

using namespace rdstab;

TEST_CASE("default nonlinearity satisfies its sector and derivative bound") {
  SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);
  SectorValidation v = validate_sector(phi, 1.0, 0.5);
  CHECK(v.pass);
  CHECK(v.worst_two_sided >= 0.0);
  CHECK(v.sup_deriv <= 9.02);
  CHECK(v.sup_deriv >= 8.5);  // the steep rise sits near the reported bound
  CHECK(phi(0.0) == 0.0);
  CHECK(phi(10.0) == doctest::Approx(5.0));
  CHECK(phi(-10.0) == doctest::Approx(-5.0));
}

TEST_CASE("derivative plateau and isolated zero-derivative knots") {
  SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);
  for (double x = 1.2; x <= 1.8; x += 0.01) CHECK(std::abs(phi.deriv(x)) <= 1e-12);
  for (double x : {2.6, 4.0, 4.8}) CHECK(std::abs(phi.deriv(x)) <= 1e-12);
  CHECK(phi.deriv(4.4) > 8.0);  // steep segment
  CHECK(phi.deriv(5.4) < 0.0);  // descending segment
}

TEST_CASE("default nonlinearity is non-injective") {
  SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);
  // phi rises to 7 at x=4.8 then descends into the tail: pick a level in between
  double level = 5.0;
  auto solve_on = [&](double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      if ((phi(mid) - level) * (phi(lo) - level) <= 0)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  double x1 = solve_on(4.0, 4.8);   // rising branch
  double x2 = solve_on(4.8, 6.0);   // descending branch
  CHECK(std::abs(x1 - x2) > 0.1);
  CHECK(std::abs(phi(x1) - phi(x2)) <= 1e-9);
}

TEST_CASE("linear instance is the psi == 0 oracle") {
  SectorNonlinearity id = SectorNonlinearity::linear(1.0);
  for (double x : {-3.0, -0.5, 0.0, 1.0, 7.7}) {
    CHECK(id(x) == doctest::Approx(x));
    CHECK(id.deriv(x) == doctest::Approx(1.0));
    double psi = id(x) - 1.0 * x;
    CHECK(psi == 0.0);
  }
  CHECK(validate_sector(id, 1.0, 0.5).pass);
  CHECK(validate_sector(id, 1.0, 0.01).pass);
}

TEST_CASE("validate_sector flags an out-of-sector function") {
  SectorNonlinearity two = SectorNonlinearity::linear(2.0);
  SectorValidation v = validate_sector(two, 1.0, 0.5);
  CHECK_FALSE(v.pass);
  CHECK(v.worst_two_sided < 0.0);
  // the quadratic psi-form agrees with the two-sided form
  CHECK(v.two_sided_ok == v.psi_form_ok);
  SectorValidation good = validate_sector(SectorNonlinearity::linear(1.0), 1.0, 0.5);
  CHECK(good.two_sided_ok == good.psi_form_ok);
}

TEST_CASE("rescaling about the center line") {
  SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);

  SUBCASE("identity remap leaves the function unchanged") {
    SectorNonlinearity same = phi.rescaled(0.5);
    for (double x = -8.0; x <= 8.0; x += 0.37)
      CHECK(same(x) == doctest::Approx(phi(x)).epsilon(1e-14));
  }

  SUBCASE("rescaled width validates at the new width only") {
    SectorNonlinearity wide = phi.rescaled(0.72);
    CHECK(validate_sector(wide, 1.0, 0.72).pass);
    CHECK_FALSE(validate_sector(wide, 1.0, 0.5).pass);
    // tails become (k - new_dk) x
    CHECK(wide(10.0) == doctest::Approx(2.8));
  }

  SUBCASE("make_default at a width equals rescaling the canonical width") {
    SectorNonlinearity direct = SectorNonlinearity::make_default(1.0, 0.72);
    SectorNonlinearity remap = phi.rescaled(0.72);
    for (double x = -9.0; x <= 9.0; x += 0.61)
      CHECK(direct(x) == doctest::Approx(remap(x)).epsilon(1e-13));
  }

  SUBCASE("odd symmetry is preserved") {
    SectorNonlinearity wide = phi.rescaled(0.3);
    for (double x = 0.1; x <= 12.0; x += 0.7)
      CHECK(wide(-x) == doctest::Approx(-wide(x)).epsilon(1e-14));
  }
}

TEST_CASE("construction rejects invalid widths") {
  CHECK_THROWS(SectorNonlinearity::make_default(1.0, 0.0));
  CHECK_THROWS(SectorNonlinearity::make_default(1.0, 1.0));
  SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);
  CHECK_THROWS(phi.rescaled(1.5));
}
