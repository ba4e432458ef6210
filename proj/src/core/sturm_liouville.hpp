#pragma once

#include <Eigen/Dense>

#include "core/operator_spec.hpp"

namespace rdstab {

// Second-order finite-volume discretization of A f = -(p f')' + q_eff f with
// separated boundary conditions, on a uniform grid of m nodes.
// Row form acts on the active nodes (a Dirichlet end at x=1 is eliminated);
// `input` carries the coupling of the x=1 boundary value into the active rows,
// so a simulated field obeys  z' = -(A z) + input * u + sources.
struct DiscreteOperator {
  Eigen::VectorXd grid;               // all m nodes
  int i0 = 0, i1 = 0;                 // active range [i0, i1] in the full grid
  double h = 0.0;
  Eigen::VectorXd diag, sub, sup;     // row-form tridiagonal on active nodes
  Eigen::VectorXd weights;            // trapezoid weights of active nodes
  Eigen::VectorXd input;              // boundary-value coupling (active nodes)
  bool dirichlet_right = false;

  int active_size() const { return i1 - i0 + 1; }
};

DiscreteOperator discretize(const OperatorSpec& spec, int m, bool use_q_tilde);

struct SpectralBasis {
  Eigen::VectorXd lambdas;       // n_modes, increasing
  Eigen::VectorXd phi0, phi1, dphi1;
  Eigen::MatrixXd samples;       // grid_nodes x n_modes, unit discrete L2 norm
  Eigen::MatrixXd d2_samples;    // analytic second derivatives (closed form only)
  Eigen::VectorXd grid, weights; // full grid and trapezoid weights
  int n_modes = 0;
  bool closed_form = false;

  // refinement levels used for Richardson extrapolation (numeric basis only);
  // level 0 is the base grid above
  struct Level {
    Eigen::VectorXd grid, weights, lambdas;
    Eigen::MatrixXd samples;
  };
  std::vector<Level> levels;

  // long eigenvalue/trace table for tail sums (constant-coefficient specs)
  Eigen::VectorXd tail_lambdas, tail_phi0;
};

// Finite-difference eigensolve with three-level Richardson extrapolation of
// eigenvalues and boundary traces. Throws on eigensolver failure or a violated
// eigenvalue bracket.
SpectralBasis solve_eigenproblem(const OperatorSpec& spec, int n_modes);

// Analytic eigenpairs for constant p, q (exact wavenumbers for the
// Dirichlet/Neumann angle combinations, characteristic-equation root finding
// otherwise). Sampled on `grid_nodes` nodes (spec.grid_resolution if -1).
SpectralBasis closed_form_basis(const OperatorSpec& spec, int n_modes,
                                int grid_nodes = -1);

// single-level eigensolve on an m-node grid, no extrapolation and no tail
// table; used for diagnostics bases on simulation meshes
SpectralBasis solve_eigenproblem_single(const OperatorSpec& spec, int m, int n_modes);

struct BasisDiagnostics {
  Eigen::VectorXd eigen_residual;   // per-mode, relative to lambda_n
  Eigen::VectorXd residual_tol;
  double gram_deviation = 0.0;
  double gram_tol = 0.0;
  bool monotone_ok = false;
  bool bracket_ok = false;
  bool residual_ok = false;
  bool gram_ok = false;
  bool pass = false;
};

BasisDiagnostics verify_basis(const SpectralBasis& basis, const OperatorSpec& spec);

}  // namespace rdstab
