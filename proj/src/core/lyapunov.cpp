#include "core/lyapunov.hpp"

#include <stdexcept>

namespace rdstab {

LyapunovSolver::LyapunovSolver(const Eigen::MatrixXd& F, double delta) {
  const int n = static_cast<int>(F.rows());
  Eigen::MatrixXd A = F + delta * Eigen::MatrixXd::Identity(n, n);
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(A);
  if (schur.info() != Eigen::Success) throw std::runtime_error("Schur factorization failed");
  U_ = schur.matrixU();
  T_ = schur.matrixT();
  double amax = -1e300;
  for (int i = 0; i < n; ++i) amax = std::max(amax, T_(i, i).real());
  abscissa_ = amax - delta;
  if (!(amax < 0.0))
    throw std::runtime_error("F + delta I is not Hurwitz (abscissa " +
                             std::to_string(abscissa_) + " >= -delta); no PD solution");
}

Eigen::MatrixXd LyapunovSolver::solve(const Eigen::MatrixXd& Q) const {
  const int n = static_cast<int>(T_.rows());
  Eigen::MatrixXcd Qt = U_.adjoint() * Q * U_;
  Eigen::MatrixXcd Y(n, n);
  // T^H Y + Y T = -Qt, column by column; T^H is lower triangular
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXcd rhs = -Qt.col(j);
    for (int k = 0; k < j; ++k) rhs -= T_(k, j) * Y.col(k);
    for (int i = 0; i < n; ++i) {
      std::complex<double> acc = rhs[i];
      for (int l = 0; l < i; ++l) acc -= std::conj(T_(l, i)) * Y(l, j);
      Y(i, j) = acc / (std::conj(T_(i, i)) + T_(j, j));
    }
  }
  Eigen::MatrixXd P = (U_ * Y * U_.adjoint()).real();
  return 0.5 * (P + P.transpose());
}

Eigen::MatrixXd solve_shifted_lyapunov(const Eigen::MatrixXd& F, double delta,
                                       const Eigen::MatrixXd& Q) {
  return LyapunovSolver(F, delta).solve(Q);
}

double lyapunov_residual(const Eigen::MatrixXd& F, double delta,
                         const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd R = F.transpose() * P + P * F + 2.0 * delta * P + Q;
  return R.cwiseAbs().maxCoeff();
}

}  // namespace rdstab
