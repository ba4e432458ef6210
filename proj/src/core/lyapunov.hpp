#pragma once

#include <Eigen/Dense>

namespace rdstab {

// Solves F^T P + P F + 2 delta P = -Q (Q symmetric) through a cached complex
// Schur factorization of F + delta I, so repeated solves against the same F
// cost one triangular sweep each. Throws if F + delta I is not Hurwitz.
class LyapunovSolver {
 public:
  LyapunovSolver(const Eigen::MatrixXd& F, double delta);
  Eigen::MatrixXd solve(const Eigen::MatrixXd& Q) const;
  double abscissa() const { return abscissa_; }  // max Re eig(F)

 private:
  Eigen::MatrixXcd U_, T_;
  double abscissa_ = 0.0;
};

Eigen::MatrixXd solve_shifted_lyapunov(const Eigen::MatrixXd& F, double delta,
                                       const Eigen::MatrixXd& Q);

// residual ||F^T P + P F + 2 delta P + Q||_inf, for verification
double lyapunov_residual(const Eigen::MatrixXd& F, double delta,
                         const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q);

}  // namespace rdstab
