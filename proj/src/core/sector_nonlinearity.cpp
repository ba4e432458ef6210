#include "core/sector_nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace rdstab {

namespace {

// canonical knot table for (k_phi, dk_phi) = (1, 0.5); other widths are affine
// remaps about the center line. Shape: near-upper-bound rise, plateau on
// [1.2, 1.8], shallow descent, steep rise peaking at slope 9, descent into the
// 0.5 x tail at x = 6.
const std::vector<SectorNonlinearity::Knot> kCanonicalKnots = {
    {0.0, 0.00, 1.20}, {0.6, 0.72, 0.90}, {1.2, 1.55, 0.00}, {1.8, 1.55, 0.00},
    {2.6, 1.45, 0.00}, {4.0, 2.20, 0.00}, {4.8, 7.00, 0.00}, {6.0, 3.00, 0.50}};

struct HermiteSeg {
  double x0, h, y0, y1, m0, m1;
  double value(double t) const {
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
  }
  // derivative in x is (a t^2 + b t + c)/h
  void deriv_poly(double& a, double& b, double& c) const {
    a = 6 * (y0 - y1) + 3 * h * (m0 + m1);
    b = 6 * (y1 - y0) - 4 * h * m0 - 2 * h * m1;
    c = h * m0;
  }
  double deriv(double t) const {
    double a, b, c;
    deriv_poly(a, b, c);
    return (a * t * t + b * t + c) / h;
  }
  double max_abs_deriv() const {
    double a, b, c;
    deriv_poly(a, b, c);
    double best = std::max(std::abs(c), std::abs(a + b + c)) / h;
    if (std::abs(a) > 0) {
      double tv = -b / (2 * a);
      if (tv > 0 && tv < 1)
        best = std::max(best, std::abs(a * tv * tv + b * tv + c) / h);
    }
    return best;
  }
};

}  // namespace

double SectorNonlinearity::eval_pos(double x) const {
  if (knots_.empty()) return k_phi_ * x;
  if (x >= tail_start_) return (k_phi_ - dk_phi_) * x;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (x <= knots_[i + 1].x) {
      const auto& a = knots_[i];
      const auto& b = knots_[i + 1];
      HermiteSeg s{a.x, b.x - a.x, a.y, b.y, a.m, b.m};
      return s.value((x - a.x) / s.h);
    }
  }
  return (k_phi_ - dk_phi_) * x;
}

double SectorNonlinearity::deriv_pos(double x) const {
  if (knots_.empty()) return k_phi_;
  if (x >= tail_start_) return k_phi_ - dk_phi_;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (x <= knots_[i + 1].x) {
      const auto& a = knots_[i];
      const auto& b = knots_[i + 1];
      HermiteSeg s{a.x, b.x - a.x, a.y, b.y, a.m, b.m};
      return s.deriv((x - a.x) / s.h);
    }
  }
  return k_phi_ - dk_phi_;
}

double SectorNonlinearity::operator()(double x) const {
  return x >= 0 ? eval_pos(x) : -eval_pos(-x);
}

double SectorNonlinearity::deriv(double x) const { return deriv_pos(std::abs(x)); }

double SectorNonlinearity::measured_deriv_bound() const {
  double best = std::abs(k_phi_ - dk_phi_);
  if (knots_.empty()) return k_phi_;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const auto& a = knots_[i];
    const auto& b = knots_[i + 1];
    HermiteSeg s{a.x, b.x - a.x, a.y, b.y, a.m, b.m};
    best = std::max(best, s.max_abs_deriv());
  }
  return best;
}

void SectorNonlinearity::validate_construction() const {
  if (knots_.empty()) return;
  if (knots_.front().x != 0.0 || knots_.front().y != 0.0)
    throw std::runtime_error("phi(0) must be 0");
  if (std::abs(knots_.back().x - tail_start_) > 1e-12)
    throw std::runtime_error("last knot must sit at the tail start");
  // C^1 junction into the tail
  if (std::abs(knots_.back().y - (k_phi_ - dk_phi_) * tail_start_) > 1e-9 ||
      std::abs(knots_.back().m - (k_phi_ - dk_phi_)) > 1e-9)
    throw std::runtime_error("tail junction breaks C^1");
  // two-sided sector bound, checked densely on the knot region
  const int ns = 60001;
  for (int i = 1; i < ns; ++i) {
    double x = tail_start_ * double(i) / (ns - 1);
    double v = eval_pos(x);
    double lo = (k_phi_ - dk_phi_) * x, hi = (k_phi_ + dk_phi_) * x;
    if (v < lo - 1e-9 || v > hi + 1e-9)
      throw std::runtime_error("knot set violates the sector bounds at x=" +
                               std::to_string(x));
  }
  // interior knots keep a normalized safety margin (scaled once the sector
  // half-width itself drops near the 1e-3 floor)
  const double required = std::min(1e-3, 0.05 * dk_phi_);
  for (std::size_t i = 1; i + 1 < knots_.size(); ++i) {
    double x = knots_[i].x, y = knots_[i].y;
    double margin = std::min(y - (k_phi_ - dk_phi_) * x, (k_phi_ + dk_phi_) * x - y) / x;
    if (margin < required)
      throw std::runtime_error("interior knot margin below the safety floor");
  }
}

SectorNonlinearity SectorNonlinearity::make_default(double k_phi, double dk_phi) {
  if (!(k_phi > 0) || !(dk_phi > 0 && dk_phi < k_phi))
    throw std::invalid_argument("need 0 < dk_phi < k_phi");
  SectorNonlinearity f;
  f.k_phi_ = k_phi;
  f.dk_phi_ = dk_phi;
  f.tail_start_ = 6.0;
  const double r = dk_phi / 0.5;
  f.knots_.reserve(kCanonicalKnots.size());
  for (const auto& kn : kCanonicalKnots)
    f.knots_.push_back({kn.x, k_phi * kn.x + r * (kn.y - kn.x), k_phi + r * (kn.m - 1.0)});
  f.validate_construction();
  return f;
}

SectorNonlinearity SectorNonlinearity::linear(double k) {
  if (!(k > 0)) throw std::invalid_argument("linear slope must be positive");
  SectorNonlinearity f;
  f.k_phi_ = k;
  f.dk_phi_ = 0.0;
  return f;
}

SectorNonlinearity SectorNonlinearity::rescaled(double new_dk) const {
  if (!(new_dk > 0 && new_dk < k_phi_))
    throw std::invalid_argument("new_dk must lie in (0, k_phi)");
  SectorNonlinearity f = *this;
  if (knots_.empty()) return f;  // psi == 0 sits in every sector
  const double r = new_dk / dk_phi_;
  for (std::size_t i = 0; i < f.knots_.size(); ++i) {
    f.knots_[i].y = k_phi_ * knots_[i].x + r * (knots_[i].y - k_phi_ * knots_[i].x);
    f.knots_[i].m = k_phi_ + r * (knots_[i].m - k_phi_);
  }
  f.dk_phi_ = new_dk;
  f.validate_construction();
  return f;
}

SectorValidation validate_sector(const SectorNonlinearity& phi, double k_phi,
                                 double dk_phi, int grid_points) {
  if (grid_points < 10000) grid_points = 10000;
  SectorValidation v;
  v.sup_deriv = phi.measured_deriv_bound();
  const double X = 20.0 * 6.0;
  double worst2 = 1e300, worstp = 1e300;
  for (int i = 0; i < grid_points; ++i) {
    double x = -X + 2.0 * X * double(i) / (grid_points - 1);
    if (std::abs(x) < 1e-9) continue;
    double val = phi(x);
    double s = x >= 0 ? 1.0 : -1.0;
    double lo = (k_phi - dk_phi) * std::abs(x), hi = (k_phi + dk_phi) * std::abs(x);
    double two = std::min(s * val - lo, hi - s * val) / std::abs(x);
    double psi = val - k_phi * x;
    double pform = (dk_phi * dk_phi * x * x - psi * psi) / (x * x);
    worst2 = std::min(worst2, two);
    worstp = std::min(worstp, pform);
  }
  v.worst_two_sided = worst2;
  v.worst_psi = worstp;
  v.two_sided_ok = worst2 >= -1e-9;
  v.psi_form_ok = worstp >= -1e-9;
  // analytic tail check: for |x| >= tail_start phi is exactly t x with
  // t = phi.k_phi - phi.dk_phi; inside the sector iff k-dk <= t <= k+dk
  double t = phi.is_linear() ? phi.k_phi() : (phi.k_phi() - phi.dk_phi());
  v.tail_ok = (t >= k_phi - dk_phi - 1e-12) && (t <= k_phi + dk_phi + 1e-12);
  v.pass = v.two_sided_ok && v.psi_form_ok && v.tail_ok;
  return v;
}

}  // namespace rdstab
