#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/certificates.hpp"
#include "core/sector_nonlinearity.hpp"
#include "core/spectral_model.hpp"

namespace rdstab {

struct SimConfig {
  int mesh_nodes = 201;
  double t_final = 10.0;
  double dt = 1e-3;
  int record_stride = 10;
  Eigen::VectorXd z0;      // full-mesh initial profile; empty -> scaled default
  double z0_scale = 1.0;
  Eigen::VectorXd zhat0;   // observer initial state (length N); empty -> zeros
  double divergence_abs = 1e12;
  double divergence_rel = 1e3;  // flag when L2 norm exceeds rel * initial
  bool track_w_field = true;
  int diag_modes = 0;      // 0: automatic
  int snapshot_count = 5;
  bool project_compatibility = true;
};

struct DiagBasis {
  Eigen::VectorXd lambdas, phi0, b_n;
  Eigen::MatrixXd samples;   // mesh x modes
  Eigen::VectorXd weights;
};

struct Trajectory {
  std::vector<double> t, l2, h1, u, uphi, y;
  Eigen::MatrixXd zhat;              // N x records
  Eigen::MatrixXd z_modes, w_modes;  // diag modes x records
  DiagBasis diag;
  std::vector<double> snapshot_times;
  std::vector<Eigen::VectorXd> snapshots;  // full-mesh profiles
  bool diverged = false;
  double diverged_time = -1.0;
  double compat_correction = 0.0;
  int fixed_point_failures = 0;
  int N = 0, N0 = 0;
  double delta = 0.0;
};

// cos-profile scaled to unit discrete H1 norm
Eigen::VectorXd default_initial_profile(const OperatorSpec& spec, int mesh_nodes);

// Crank-Nicolson method-of-lines simulation of the plant coupled with the
// observer-based boundary feedback through the sector nonlinearity
Trajectory simulate_closed_loop(const OperatorSpec& spec, const SpectralBasis& basis,
                                const LiftingData& lifting, const GainSet& gains,
                                const SectorNonlinearity& phi, const SimConfig& config);

// linear-design path: u enters the boundary directly (scaled by k_phi),
// no nonlinearity object in the loop
Trajectory simulate_linear(const OperatorSpec& spec, const SpectralBasis& basis,
                           const LiftingData& lifting, const GainSet& gains,
                           const SimConfig& config);

struct DecayFit {
  double rate = 0.0;
  double residual = 0.0;
  int points = 0;
};

// least-squares slope of log sqrt(||z||_H1^2 + |zhat|^2) over [t0, t1]
DecayFit decay_rate_fit(const Trajectory& traj, double t0, double t1);

struct LyapunovTrace {
  std::vector<double> t, V;
  int violations = 0;
  double worst_ratio = 0.0;  // max of V_{k+1} / (V_k e^{-2 delta dt}) - 1
};

LyapunovTrace lyapunov_trace(const Trajectory& traj, const FeasibilityCertificate& cert,
                             const StabilityModel& model, double eps_tol = 1e-2);

struct MeshConvergence {
  std::vector<int> nodes;
  std::vector<double> diffs;    // max |l2_{l+1}(t) - l2_l(t)| between levels
  std::vector<double> orders;   // observed convergence orders
};

MeshConvergence mesh_convergence(const OperatorSpec& spec, const SpectralBasis& basis,
                                 const LiftingData& lifting, const GainSet& gains,
                                 const SectorNonlinearity* phi, SimConfig config,
                                 const std::vector<int>& levels);

}  // namespace rdstab
