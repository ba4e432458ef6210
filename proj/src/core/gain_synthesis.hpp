#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/sturm_liouville.hpp"

namespace rdstab {

struct GainSet {
  int N0 = 1;              // fed-back (unstable-or-floor) mode count
  int N = 2;               // observer dimension
  Eigen::RowVectorXd K;    // 1 x N0 feedback row
  Eigen::VectorXd L;       // N0 x 1 observer column
  double delta = 0.0;      // decay target
  double k_phi = 1.0;      // sector center slope seen by the feedback path
  std::vector<double> target_poles;
};

// smallest N0 >= 1 with -lambda_n + q_c < -delta for all n >= N0+1
int unstable_mode_count(const SpectralBasis& basis, double q_c, double delta);

// SISO pole placement (Ackermann, characteristic-polynomial matching) for
// A0 + B0eff K; A0 passed as its diagonal
Eigen::RowVectorXd place_poles_feedback(const Eigen::VectorXd& A0_diag,
                                        const Eigen::VectorXd& B0_eff,
                                        const std::vector<double>& poles);

// observer gain via duality on (A0^T, C0^T): A0 - L C0 gets the given poles
Eigen::VectorXd place_poles_observer(const Eigen::VectorXd& A0_diag,
                                     const Eigen::RowVectorXd& C0,
                                     const std::vector<double>& poles);

struct GainOptions {
  double delta = 0.3;
  std::vector<double> poles;  // empty: all at -(delta + 1)
  int N = -1;                 // observer dimension; -1: N0 + 1
  int N0_override = -1;       // must be >= computed N0 when given
  double k_phi = 1.0;
};

GainSet synthesize_gains(const OperatorSpec& spec, const SpectralBasis& basis,
                         const GainOptions& opts);

}  // namespace rdstab
