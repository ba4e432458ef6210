#include "core/operator_spec.hpp"

#include <cmath>
#include <stdexcept>

namespace rdstab {

void OperatorSpec::validate() const {
  const double pi = M_PI;
  if (!(theta1 > 0.0 && theta1 <= pi / 2 + 1e-15))
    throw std::invalid_argument("theta1 must lie in (0, pi/2]");
  if (!(theta2 >= 0.0 && theta2 <= pi / 2 + 1e-15))
    throw std::invalid_argument("theta2 must lie in [0, pi/2]");
  if (grid_resolution < 11) throw std::invalid_argument("grid_resolution too small");
  const int ns = 4097;
  for (int i = 0; i < ns; ++i) {
    double x = double(i) / (ns - 1);
    if (!(p(x) > 0.0)) throw std::invalid_argument("p must be positive on [0,1]");
    if (!(q(x) > 0.0)) throw std::invalid_argument("q must be positive on [0,1]");
    if (std::abs(q(x) - (q_tilde(x) + q_c)) > 1e-12 * (1.0 + std::abs(q(x))))
      throw std::invalid_argument("q != q_tilde + q_c");
  }
}

double select_qc(const Coefficient& q_tilde) {
  double m = q_tilde.min_value();
  return std::ceil(std::max(0.0, -m)) + 1.0;
}

OperatorSpec make_operator_spec(double theta1, double theta2, Coefficient p,
                                Coefficient q_tilde, int grid_resolution) {
  OperatorSpec s;
  s.theta1 = theta1;
  s.theta2 = theta2;
  s.p = std::move(p);
  s.q_tilde = std::move(q_tilde);
  s.q_c = select_qc(s.q_tilde);
  s.q = s.q_tilde.shifted(s.q_c);
  s.grid_resolution = grid_resolution;
  s.p_lo = s.p.min_value();
  s.p_hi = s.p.max_value();
  s.q_hi = s.q.max_value();
  s.validate();
  return s;
}

}  // namespace rdstab
