#pragma once

#include <Eigen/Dense>

#include "core/gain_synthesis.hpp"
#include "core/operator_spec.hpp"
#include "core/sturm_liouville.hpp"

namespace rdstab {

// Boundary-lifting data: w = z - b(x) u with
//   b(x) = -x^2 / (cos t2 + 2 sin t2)
//   a(x) = (2 p + 2 x p' - x^2 q_tilde) / (cos t2 + 2 sin t2)
// together with projection coefficients and the input coefficients
//   beta_n = p(1) (-cos t2 phi_n'(1) + sin t2 phi_n(1)) = a_n + (-lambda_n + q_c) b_n.
struct LiftingData {
  Eigen::VectorXd a_samples, b_samples;  // on the basis grid
  Eigen::VectorXd a_n, b_n, beta_n;
  double a_norm_sq = 0.0, b_norm_sq = 0.0;
  double denom = 1.0;                    // cos t2 + 2 sin t2
  Eigen::VectorXd identity_residual;     // |beta_n - a_n - (-lam+qc) b_n| / (1+lam)
};

LiftingData lifting_coefficients(const OperatorSpec& spec, const SpectralBasis& basis);

// Parseval tail complements (r_a, r_b) = (||R_N a||^2, ||R_N b||^2), clamped at 0
std::pair<double, double> tail_norms(const LiftingData& lifting, int N);

// Upper estimate of sum_{n>N} phi_n(0)^2 / lambda_n^exponent  (exponent 1 or 3/4):
// partial sum over the tail table plus a rigorous remainder bound from the
// eigenvalue bracket. Throws when the remainder exceeds 10% of the partial sum.
double tail_mode_sum(const SpectralBasis& basis, int N, double exponent,
                     const OperatorSpec& spec);

// Assembled closed-loop analysis matrices. State ordering inside X (dim 2N):
//   [ zhat_1..zhat_N0 | e_1..e_N0 | zhat_n/lambda_n (n=N0+1..N) | sqrt(lambda_n) e_n ]
struct StabilityModel {
  int N0 = 1, N = 2;
  bool includes_psi = false;
  double k_phi = 1.0, delta = 0.0, q_c = 0.0;
  Eigen::MatrixXd F;          // 2N x 2N
  Eigen::VectorXd Lcal;       // col(L, -L, 0, 0)
  Eigen::VectorXd Lpsi;       // col(B0, 0, B1t, 0) (sector model only; else empty)
  Eigen::RowVectorXd Ktilde;  // [K 0 0 0]
  Eigen::RowVectorXd Erow;    // v-row; 2N+1 (linear) or 2N+2 (sector)
  double r_a = 0.0, r_b = 0.0;
  double m_tail = 0.0, m_tail34 = 0.0;
  double lambda_Np1 = 0.0;
  double a_norm_sq = 0.0;
  // building blocks kept for audit
  Eigen::VectorXd A0_diag, A1_diag, B0, B1t;
  Eigen::RowVectorXd C0, C1t;
  Eigen::RowVectorXd K;
  Eigen::VectorXd L;
  int dim() const { return 2 * N; }
  int theta_dim() const { return 2 * N + (includes_psi ? 2 : 1); }
};

StabilityModel build_stability_model(const OperatorSpec& spec, const SpectralBasis& basis,
                                     const LiftingData& lifting, const GainSet& gains,
                                     bool includes_psi);

}  // namespace rdstab
