#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/lyapunov.hpp"
#include "core/spectral_model.hpp"

namespace rdstab {

enum class TheoremId { T1_H1_linear, T2_L2_linear, T3_H1_sector, C4_L2_sector };

const char* theorem_name(TheoremId t);
TheoremId theorem_from_name(const std::string& s);
bool theorem_is_sector(TheoremId t);
bool theorem_is_l2(TheoremId t);
double theorem_alpha_min(TheoremId t);

struct SectorSpec {
  double k_phi = 1.0;
  double dk_phi = 0.5;
  double phi_deriv_bound = 9.02;
  void validate() const;
};

struct CertScalars {
  double alpha = 0.0, beta = 0.0, gamma = 1.0, tau = 0.0;
};

struct ThetaBlocks {
  Eigen::MatrixXd theta1;
  double theta2 = 0.0;
  double theta3 = 0.0;
  bool has_theta3 = false;
};

ThetaBlocks assemble_theta(const StabilityModel& model, const SectorSpec* sector,
                           const Eigen::MatrixXd& P, const CertScalars& s,
                           TheoremId theorem);

struct CertificateMargins {
  double theta1_max_eig = 1e300;
  double theta2 = 1e300;
  double theta3 = -1e300;
  double p_min_eig = -1e300;
};

// slack tolerances absorbing eigensolver round-off
constexpr double kTheta1Slack = 1e-9;
constexpr double kScalarSlack = 1e-12;

struct FeasibilityCertificate {
  TheoremId theorem = TheoremId::T1_H1_linear;
  CertScalars scalars;
  Eigen::MatrixXd P;
  CertificateMargins margins;
  bool feasible = false;
  std::string note;
};

// assembles Theta from (P, scalars), runs the full symmetric eigensolve, and
// fills margins; the one audit path every certificate must pass
FeasibilityCertificate verify_certificate(const StabilityModel& model, TheoremId theorem,
                                          const SectorSpec* sector,
                                          const Eigen::MatrixXd& P, const CertScalars& s);

// the proofs' explicit parameter recipes; feasibility is not guaranteed at
// small N (margins report honestly)
FeasibilityCertificate constructive_certificate(const StabilityModel& model,
                                                TheoremId theorem,
                                                const SectorSpec* sector);

struct SearchOptions {
  int alpha_points = 14;
  double alpha_max = 300.0;
  int tau_points = 12;
  double tau_min = 0.3, tau_max = 3e4;
  double beta_fraction = 0.9;
  int fp_iters = 250;
  int golden_iters = 10;
  double accept_margin = -1e-8;  // stop as soon as this is reached
};

// gamma = 1 normalized search: beta pinned analytically to a fraction of its
// scalar-constraint bound, scalar-step = log grid + golden refinement over
// (alpha, tau), P-step = fixed-point iteration of shifted Lyapunov solves on
// the Schur-complement Riccati form of Theta1
FeasibilityCertificate search_certificate(const StabilityModel& model, TheoremId theorem,
                                          const SectorSpec* sector,
                                          const SearchOptions& opts = {});

struct MinFeasibleResult {
  bool found = false;
  int N = -1;
  FeasibilityCertificate cert;
  std::vector<std::pair<int, double>> margins;  // (N, best margin)
};

MinFeasibleResult min_feasible_N(const OperatorSpec& spec, const SpectralBasis& basis,
                                 const LiftingData& lifting, const GainSet& gains,
                                 TheoremId theorem, const SectorSpec* sector, int N_max,
                                 const SearchOptions& opts = {});

struct SectorSizeResult {
  double dk_max = 0.0;
  bool any_feasible = false;
  double deriv_bound_at_max = 0.0;
  FeasibilityCertificate cert;
};

// bisection on the sector half-width with search_certificate as the oracle;
// deriv_bound maps dk -> the derivative bound of the phi instance used
SectorSizeResult max_sector_size(const OperatorSpec& spec, const SpectralBasis& basis,
                                 const LiftingData& lifting, const GainSet& gains, int N,
                                 double k_phi,
                                 const std::function<double(double)>& deriv_bound,
                                 TheoremId theorem = TheoremId::T3_H1_sector,
                                 double resolution = 1e-3,
                                 const SearchOptions& opts = {});

// ||P^N|| for F^T P + P F + 2 delta P = -I over a range of observer dimensions
// (K, L fixed); numerical reflection of the appendix boundedness lemma
std::vector<double> lyapunov_norm_study(const OperatorSpec& spec,
                                        const SpectralBasis& basis,
                                        const LiftingData& lifting, const GainSet& gains,
                                        int N_lo, int N_hi);

}  // namespace rdstab
