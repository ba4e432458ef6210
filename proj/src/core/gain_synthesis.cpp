#include "core/gain_synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace rdstab {

int unstable_mode_count(const SpectralBasis& basis, double q_c, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  int count = 0;
  for (int n = 0; n < basis.n_modes; ++n)
    if (basis.lambdas[n] <= q_c + delta) count = n + 1;
  if (count >= basis.n_modes)
    throw std::runtime_error("all computed modes violate -lambda_n + q_c < -delta; "
                             "compute more modes");
  return std::max(1, count);
}

namespace {

// coefficients of prod (s - p_i), ascending order
std::vector<double> char_poly(const std::vector<double>& poles) {
  std::vector<double> c{1.0};
  for (double p : poles) {
    std::vector<double> nc(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      nc[i + 1] += c[i];
      nc[i] -= p * c[i];
    }
    c = nc;
  }
  return c;  // c[0] + c[1] s + ... + s^n
}

Eigen::MatrixXd poly_of_matrix(const std::vector<double>& c, const Eigen::MatrixXd& A) {
  int n = static_cast<int>(A.rows());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = c.size(); i-- > 0;) {
    acc = acc * A;
    acc += c[i] * Eigen::MatrixXd::Identity(n, n);
  }
  return acc;
}

}  // namespace

Eigen::RowVectorXd place_poles_feedback(const Eigen::VectorXd& A0_diag,
                                        const Eigen::VectorXd& B0_eff,
                                        const std::vector<double>& poles) {
  const int n = static_cast<int>(A0_diag.size());
  if (static_cast<int>(poles.size()) != n)
    throw std::invalid_argument("pole count must equal N0");
  for (int i = 0; i < n; ++i)
    if (std::abs(B0_eff[i]) < 1e-12)
      throw std::runtime_error("degenerate input coefficient in pole placement");
  Eigen::MatrixXd A = A0_diag.asDiagonal();
  Eigen::MatrixXd C(n, n);
  Eigen::VectorXd col = B0_eff;
  for (int j = 0; j < n; ++j) {
    C.col(j) = col;
    col = A * col;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  if (!lu.isInvertible())
    throw std::runtime_error("controllability matrix singular; placement ill-posed");
  Eigen::MatrixXd chiA = poly_of_matrix(char_poly(poles), A);
  Eigen::RowVectorXd en = Eigen::RowVectorXd::Zero(n);
  en[n - 1] = 1.0;
  Eigen::RowVectorXd K = -en * lu.solve(chiA);

  // placement exactness check
  Eigen::MatrixXd Acl = A + B0_eff * K;
  Eigen::VectorXcd ev = Acl.eigenvalues();
  for (double p : poles) {
    double best = 1e300;
    for (int i = 0; i < n; ++i)
      best = std::min(best, std::abs(ev[i] - std::complex<double>(p, 0.0)));
    if (best > 1e-8 * std::max(1.0, std::abs(p)))
      throw std::runtime_error("pole placement verification failed");
  }
  return K;
}

Eigen::VectorXd place_poles_observer(const Eigen::VectorXd& A0_diag,
                                     const Eigen::RowVectorXd& C0,
                                     const std::vector<double>& poles) {
  Eigen::RowVectorXd Kd = place_poles_feedback(A0_diag, -C0.transpose(), poles);
  return Kd.transpose();
}

GainSet synthesize_gains(const OperatorSpec& spec, const SpectralBasis& basis,
                         const GainOptions& opts) {
  GainSet g;
  g.delta = opts.delta;
  g.k_phi = opts.k_phi;
  int n0 = unstable_mode_count(basis, spec.q_c, opts.delta);
  if (opts.N0_override > 0) {
    if (opts.N0_override < n0)
      throw std::invalid_argument("N0 override below the unstable mode count");
    n0 = opts.N0_override;
  }
  g.N0 = n0;
  g.N = opts.N > 0 ? opts.N : n0 + 1;
  if (g.N < n0 + 1) throw std::invalid_argument("N must be >= N0 + 1");
  if (g.N > basis.n_modes) throw std::invalid_argument("N exceeds computed modes");

  std::vector<double> poles = opts.poles;
  if (poles.empty()) poles.assign(n0, -(opts.delta + 1.0));
  if (static_cast<int>(poles.size()) == 1 && n0 > 1) poles.assign(n0, poles[0]);
  for (double p : poles)
    if (!(p < -opts.delta))
      throw std::invalid_argument("requested poles must lie left of -delta");
  g.target_poles = poles;

  Eigen::VectorXd A0 = (-basis.lambdas.head(n0)).array() + spec.q_c;
  Eigen::VectorXd beta0(n0);
  for (int i = 0; i < n0; ++i)
    beta0[i] = spec.p(1.0) * (-std::cos(spec.theta2) * basis.dphi1[i] +
                              std::sin(spec.theta2) * basis.phi1[i]);
  g.K = place_poles_feedback(A0, opts.k_phi * beta0, poles);
  g.L = place_poles_observer(A0, basis.phi0.head(n0).transpose(), poles);
  return g;
}

}  // namespace rdstab
