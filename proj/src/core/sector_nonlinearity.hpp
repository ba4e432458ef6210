#pragma once

#include <vector>

#include "core/certificates.hpp"

namespace rdstab {

// Odd C^1 scalar nonlinearity confined to the sector
//   (k_phi - dk_phi)|x| <= sign(x) phi(x) <= (k_phi + dk_phi)|x|,
// built from cubic Hermite knots on [0, 6] with linear tails (k_phi - dk_phi) x
// beyond |x| = 6. The default instance is non-injective, has a derivative
// plateau, and a steep rise; a linear instance is available as the psi == 0
// oracle.
class SectorNonlinearity {
 public:
  struct Knot {
    double x, y, m;
  };

  static SectorNonlinearity make_default(double k_phi, double dk_phi);
  static SectorNonlinearity linear(double k);

  // knot ordinates affinely remapped about the center line k_phi * x so the
  // sector half-width becomes new_dk; tails become (k_phi - new_dk) x
  SectorNonlinearity rescaled(double new_dk) const;

  double operator()(double x) const;
  double deriv(double x) const;

  double k_phi() const { return k_phi_; }
  double dk_phi() const { return dk_phi_; }
  bool is_linear() const { return knots_.empty(); }
  double tail_start() const { return tail_start_; }
  const std::vector<Knot>& knots() const { return knots_; }

  // exact sup |phi'| from the piecewise-quadratic derivative plus tail slope
  double measured_deriv_bound() const;

  SectorSpec sector_spec() const { return {k_phi_, dk_phi_, measured_deriv_bound()}; }

 private:
  SectorNonlinearity() = default;
  double eval_pos(double x) const;   // x >= 0
  double deriv_pos(double x) const;  // x >= 0
  void validate_construction() const;

  double k_phi_ = 1.0;
  double dk_phi_ = 0.5;
  double tail_start_ = 6.0;
  std::vector<Knot> knots_;  // empty means linear phi(x) = k_phi x
};

struct SectorValidation {
  bool pass = false;
  bool two_sided_ok = false;
  bool psi_form_ok = false;
  bool tail_ok = false;
  double worst_two_sided = 0.0;  // min over grid of min(phi-low, up-phi)/|x|
  double worst_psi = 0.0;        // min over grid of (dk^2 x^2 - psi^2)/x^2
  double sup_deriv = 0.0;
};

// dense-grid check of the two-sided sector bound and the equivalent quadratic
// form psi^2 <= dk^2 x^2 over [-120, 120], plus the analytic tail check
SectorValidation validate_sector(const SectorNonlinearity& phi, double k_phi,
                                 double dk_phi, int grid_points = 20001);

}  // namespace rdstab
