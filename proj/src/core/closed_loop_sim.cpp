#include "core/closed_loop_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace rdstab {

namespace {

// tridiagonal LU (Thomas) with reusable factors
struct TriFactor {
  Eigen::VectorXd dl, d, du;  // factored in place
  void factor(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
              const Eigen::VectorXd& sup) {
    int n = static_cast<int>(diag.size());
    dl = sub;
    d = diag;
    du = sup;
    for (int i = 1; i < n; ++i) {
      dl[i] /= d[i - 1];
      d[i] -= dl[i] * du[i - 1];
    }
  }
  void solve(Eigen::VectorXd& x) const {
    int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) x[i] -= dl[i] * x[i - 1];
    x[n - 1] /= d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - du[i] * x[i + 1]) / d[i];
  }
};

Eigen::VectorXd tri_apply(const DiscreteOperator& op, const Eigen::VectorXd& x) {
  int n = static_cast<int>(x.size());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double v = op.diag[i] * x[i];
    if (i > 0) v += op.sub[i] * x[i - 1];
    if (i + 1 < n) v += op.sup[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

struct MeshNorms {
  Eigen::VectorXd w;  // trapezoid weights, full mesh
  double h;
  double l2(const Eigen::VectorXd& full) const {
    return std::sqrt((w.array() * full.array().square()).sum());
  }
  double h1(const Eigen::VectorXd& full) const {
    double s = (w.array() * full.array().square()).sum();
    for (int i = 0; i + 1 < full.size(); ++i) {
      double g = (full[i + 1] - full[i]) / h;
      s += h * g * g;
    }
    return std::sqrt(s);
  }
};

Trajectory run_sim(const OperatorSpec& spec, const SpectralBasis& basis,
                   const LiftingData& lifting, const GainSet& gains,
                   const SectorNonlinearity* phi, double linear_gain,
                   const SimConfig& config) {
  const int N = gains.N, N0 = gains.N0;
  if (basis.n_modes < N) throw std::invalid_argument("basis must cover N modes");
  const int M = config.mesh_nodes;
  if (M < 31) throw std::invalid_argument("mesh too coarse");
  const double dt = config.dt;
  if (!(dt > 0) || !(config.t_final > 0)) throw std::invalid_argument("bad time grid");

  auto apply_phi = [&](double uval) {
    return phi ? (*phi)(uval) : linear_gain * uval;
  };

  DiscreteOperator op = discretize(spec, M, /*use_q_tilde=*/true);
  const int na = op.active_size();
  const double h = op.h;
  MeshNorms nrm;
  nrm.h = h;
  nrm.w.setConstant(M, h);
  nrm.w[0] *= 0.5;
  nrm.w[M - 1] *= 0.5;

  // Crank-Nicolson factors: (I + dt/2 A) z1 = (I - dt/2 A) z0 + dt * g * u_mid
  TriFactor lu;
  {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(na) + 0.5 * dt * op.diag;
    Eigen::VectorXd sb = 0.5 * dt * op.sub, sp = 0.5 * dt * op.sup;
    lu.factor(sb, d, sp);
  }
  auto cn_rhs_apply = [&](const Eigen::VectorXd& z) {
    return (z - 0.5 * dt * tri_apply(op, z)).eval();
  };

  // observer: zhat' = Aobs zhat + Bu u_phi + lcol y
  Eigen::VectorXd lam = basis.lambdas.head(N);
  Eigen::VectorXd beta = lifting.beta_n.head(N);
  Eigen::VectorXd bn = lifting.b_n.head(N);
  Eigen::RowVectorXd phirow = basis.phi0.head(N).transpose();
  Eigen::VectorXd lcol = Eigen::VectorXd::Zero(N);
  lcol.head(N0) = gains.L;
  Eigen::MatrixXd Aobs = (-lam.array() + spec.q_c).matrix().asDiagonal();
  Aobs -= lcol * phirow;
  Eigen::VectorXd Bu = beta - lcol * (phirow * bn)(0, 0);
  Eigen::MatrixXd Mo1 =
      Eigen::MatrixXd::Identity(N, N) - 0.5 * dt * Aobs;
  Eigen::MatrixXd Mo2 = Eigen::MatrixXd::Identity(N, N) + 0.5 * dt * Aobs;
  Eigen::PartialPivLU<Eigen::MatrixXd> obs_lu(Mo1);

  // diagnostics basis on the simulation mesh
  int nd = config.diag_modes > 0 ? config.diag_modes
                                 : std::min(std::max(N + 10, 40), (M - 1) / 4);
  nd = std::max(nd, N);
  SpectralBasis diag_b = solve_eigenproblem_single(spec, M, nd);
  Trajectory tr;
  tr.N = N;
  tr.N0 = N0;
  tr.delta = gains.delta;
  tr.diag.lambdas = diag_b.lambdas;
  tr.diag.phi0 = diag_b.phi0;
  tr.diag.samples = diag_b.samples;
  tr.diag.weights = diag_b.weights;
  const double denom = lifting.denom;
  Eigen::VectorXd bfun(M);
  for (int i = 0; i < M; ++i) bfun[i] = -op.grid[i] * op.grid[i] / denom;
  tr.diag.b_n = diag_b.samples.transpose() * (nrm.w.asDiagonal() * bfun);
  Eigen::VectorXd afun(M);
  for (int i = 0; i < M; ++i) {
    double x = op.grid[i];
    afun[i] = (2.0 * spec.p(x) + 2.0 * x * spec.p.deriv(x) - x * x * spec.q_tilde(x)) /
              denom;
  }

  // initial data
  Eigen::VectorXd zhat = config.zhat0.size() ? config.zhat0 : Eigen::VectorXd::Zero(N);
  if (zhat.size() != N) throw std::invalid_argument("zhat0 length != N");
  Eigen::VectorXd z0 = config.z0.size()
                           ? config.z0
                           : (config.z0_scale *
                              default_initial_profile(spec, M)).eval();
  if (z0.size() != M) throw std::invalid_argument("z0 length != mesh_nodes");
  double u = (gains.K * zhat.head(N0))(0, 0);
  double uphi = apply_phi(u);

  if (config.project_compatibility) {
    // boundary-layer bump corrections enforcing the compatibility conditions
    double d0 = std::cos(spec.theta1) * z0[0] -
                std::sin(spec.theta1) * (-3 * z0[0] + 4 * z0[1] - z0[2]) / (2 * h);
    double d1 = std::cos(spec.theta2) * z0[M - 1] +
                std::sin(spec.theta2) * (3 * z0[M - 1] - 4 * z0[M - 2] + z0[M - 3]) /
                    (2 * h) - uphi;
    double wbl = 0.1;
    if (std::abs(d0) > 1e-12) {
      double trace0 = std::cos(spec.theta1) + std::sin(spec.theta1) * (2.0 / wbl);
      for (int i = 0; i < M; ++i) {
        double x = op.grid[i];
        if (x < wbl) {
          double b0v = (wbl - x) / wbl;
          z0[i] += (-d0 / trace0) * b0v * b0v;
        }
      }
      tr.compat_correction += std::abs(d0 / trace0);
    }
    if (std::abs(d1) > 1e-12) {
      double trace1 = std::cos(spec.theta2) + std::sin(spec.theta2) * (2.0 / wbl);
      for (int i = 0; i < M; ++i) {
        double x = op.grid[i];
        if (x > 1.0 - wbl) {
          double b1v = (x - (1.0 - wbl)) / wbl;
          z0[i] += (-d1 / trace1) * b1v * b1v;
        }
      }
      tr.compat_correction += std::abs(d1 / trace1);
    }
  }

  Eigen::VectorXd z = z0.segment(op.i0, na);
  Eigen::VectorXd w;  // homogeneous-representation field
  if (config.track_w_field) {
    Eigen::VectorXd wfull = z0 + bfun * uphi;
    w = wfull.segment(op.i0, na);
  }

  auto full_profile = [&](const Eigen::VectorXd& act, double bval) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(M);
    full.segment(op.i0, na) = act;
    if (op.dirichlet_right) full[M - 1] = bval;
    return full;
  };

  const int n_steps = static_cast<int>(std::llround(config.t_final / dt));
  const int stride = std::max(1, config.record_stride);
  const int n_rec = n_steps / stride + 1;
  tr.zhat.resize(N, n_rec);
  tr.z_modes.resize(nd, n_rec);
  tr.w_modes.resize(nd, n_rec);
  int rec = 0;

  double initial_l2 = nrm.l2(full_profile(z, uphi));
  double y = full_profile(z, uphi)[0];

  auto record = [&](double tnow) {
    Eigen::VectorXd zf = full_profile(z, uphi);
    tr.t.push_back(tnow);
    tr.l2.push_back(nrm.l2(zf));
    tr.h1.push_back(nrm.h1(zf));
    tr.u.push_back(u);
    tr.uphi.push_back(uphi);
    tr.y.push_back(zf[0]);
    tr.zhat.col(rec) = zhat;
    tr.z_modes.col(rec) = tr.diag.samples.transpose() * (nrm.w.asDiagonal() * zf);
    if (config.track_w_field) {
      Eigen::VectorXd wf = full_profile(w, 0.0);
      if (!op.dirichlet_right) {
        // w shares the active set with z when no node is eliminated
      }
      tr.w_modes.col(rec) = tr.diag.samples.transpose() * (nrm.w.asDiagonal() * wf);
    }
    ++rec;
  };
  record(0.0);

  int snap_every = std::max(1, n_steps / std::max(1, config.snapshot_count - 1));
  tr.snapshot_times.push_back(0.0);
  tr.snapshots.push_back(full_profile(z, uphi));

  for (int k = 1; k <= n_steps; ++k) {
    // within-step fixed point on the scalar u_phi at t_{k+1}
    double s = uphi;  // warm start
    Eigen::VectorXd z_new, zhat_new;
    double y_new = y, u_new = u;
    int it = 0;
    for (; it < 50; ++it) {
      Eigen::VectorXd rhs = cn_rhs_apply(z);
      rhs += (0.5 * dt) * op.input * (uphi + s);
      z_new = rhs;
      lu.solve(z_new);
      y_new = (op.i0 == 0) ? z_new[0] : 0.0;
      Eigen::VectorXd orhs = Mo2 * zhat +
                             0.5 * dt * (Bu * (uphi + s) + lcol * (y + y_new));
      zhat_new = obs_lu.solve(orhs);
      u_new = (gains.K * zhat_new.head(N0))(0, 0);
      double snew = apply_phi(u_new);
      if (std::abs(snew - s) <= 1e-13 * (1.0 + std::abs(snew))) {
        s = snew;
        break;
      }
      s = snew;
    }
    if (it == 50) tr.fixed_point_failures++;

    if (config.track_w_field) {
      double u_mid = 0.5 * (uphi + s);
      double v_mid = (s - uphi) / dt;
      Eigen::VectorXd src = afun * u_mid + bfun * v_mid;
      Eigen::VectorXd rhs = cn_rhs_apply(w) + dt * src.segment(op.i0, na);
      w = rhs;
      lu.solve(w);
    }

    z = z_new;
    zhat = zhat_new;
    y = y_new;
    u = u_new;
    uphi = s;

    double tnow = k * dt;
    double l2now = nrm.l2(full_profile(z, uphi));
    bool blow = !std::isfinite(l2now) || l2now > config.divergence_abs ||
                (config.divergence_rel > 0 && initial_l2 > 0 &&
                 l2now > config.divergence_rel * initial_l2);
    if (k % stride == 0) record(tnow);
    if (k % snap_every == 0 && static_cast<int>(tr.snapshots.size()) <
                                   config.snapshot_count) {
      tr.snapshot_times.push_back(tnow);
      tr.snapshots.push_back(full_profile(z, uphi));
    }
    if (blow) {
      tr.diverged = true;
      tr.diverged_time = tnow;
      break;
    }
  }
  tr.zhat.conservativeResize(N, rec);
  tr.z_modes.conservativeResize(nd, rec);
  tr.w_modes.conservativeResize(nd, rec);
  if (tr.fixed_point_failures > std::max(20, n_steps / 10))
    throw std::runtime_error("boundary coupling iteration kept failing; dt too large");
  return tr;
}

}  // namespace

Eigen::VectorXd default_initial_profile(const OperatorSpec& spec, int mesh_nodes) {
  Eigen::VectorXd z(mesh_nodes);
  double h = 1.0 / (mesh_nodes - 1);
  for (int i = 0; i < mesh_nodes; ++i) z[i] = std::cos(M_PI * i * h / 2.0);
  MeshNorms nrm;
  nrm.h = h;
  nrm.w.setConstant(mesh_nodes, h);
  nrm.w[0] *= 0.5;
  nrm.w[mesh_nodes - 1] *= 0.5;
  return z / nrm.h1(z);
}

Trajectory simulate_closed_loop(const OperatorSpec& spec, const SpectralBasis& basis,
                                const LiftingData& lifting, const GainSet& gains,
                                const SectorNonlinearity& phi, const SimConfig& config) {
  return run_sim(spec, basis, lifting, gains, &phi, 0.0, config);
}

Trajectory simulate_linear(const OperatorSpec& spec, const SpectralBasis& basis,
                           const LiftingData& lifting, const GainSet& gains,
                           const SimConfig& config) {
  return run_sim(spec, basis, lifting, gains, nullptr, gains.k_phi, config);
}

DecayFit decay_rate_fit(const Trajectory& traj, double t0, double t1) {
  DecayFit fit;
  std::vector<double> ts, qs;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    if (traj.t[i] < t0 || traj.t[i] > t1) continue;
    double q = traj.h1[i] * traj.h1[i] + traj.zhat.col(i).squaredNorm();
    if (!(q > 0)) throw std::runtime_error("non-positive norm in fit window");
    ts.push_back(traj.t[i]);
    qs.push_back(0.5 * std::log(q));
  }
  if (ts.size() < 3) throw std::runtime_error("fit window too short");
  double n = static_cast<double>(ts.size());
  double st = 0, sq = 0, stt = 0, stq = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sq += qs[i];
    stt += ts[i] * ts[i];
    stq += ts[i] * qs[i];
  }
  double slope = (n * stq - st * sq) / (n * stt - st * st);
  double icept = (sq - slope * st) / n;
  double rss = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double e = qs[i] - (icept + slope * ts[i]);
    rss += e * e;
  }
  fit.rate = -slope;
  fit.residual = std::sqrt(rss / n);
  fit.points = static_cast<int>(ts.size());
  return fit;
}

LyapunovTrace lyapunov_trace(const Trajectory& traj, const FeasibilityCertificate& cert,
                             const StabilityModel& model, double eps_tol) {
  const int N = model.N, N0 = model.N0;
  if (cert.P.rows() != 2 * N) throw std::invalid_argument("certificate/model N mismatch");
  if (traj.N != N) throw std::invalid_argument("trajectory/model N mismatch");
  const bool l2w = theorem_is_l2(cert.theorem);
  Eigen::VectorXd lam(N);
  for (int i = 0; i < N0; ++i) lam[i] = model.q_c - model.A0_diag[i];
  for (int i = N0; i < N; ++i) lam[i] = model.q_c - model.A1_diag[i - N0];

  LyapunovTrace lt;
  const int nd = static_cast<int>(traj.diag.lambdas.size());
  for (std::size_t r = 0; r < traj.t.size(); ++r) {
    Eigen::VectorXd X(2 * N);
    for (int n = 0; n < N; ++n) {
      double zn = traj.z_modes(n, r);
      double zh = traj.zhat(n, r);
      double en = zn - zh;
      if (n < N0) {
        X[n] = zh;
        X[N0 + n] = en;
      } else {
        X[N0 + n] = zh / lam[n];                  // block 3 offset: 2*N0 + (n-N0)
        X[N + n] = std::sqrt(lam[n]) * en;        // block 4 offset: N0 + N + (n-N0)
      }
    }
    double V = X.dot(cert.P * X);
    for (int n = N; n < nd; ++n) {
      double wn = traj.w_modes(n, r);
      V += cert.scalars.gamma * (l2w ? 1.0 : traj.diag.lambdas[n]) * wn * wn;
    }
    lt.t.push_back(traj.t[r]);
    lt.V.push_back(V);
  }
  for (std::size_t r = 0; r + 1 < lt.V.size(); ++r) {
    if (lt.V[r] <= 1e-300) continue;
    double decay = std::exp(-2.0 * traj.delta * (lt.t[r + 1] - lt.t[r]));
    double ratio = lt.V[r + 1] / (lt.V[r] * decay) - 1.0;
    lt.worst_ratio = std::max(lt.worst_ratio, ratio);
    if (ratio > eps_tol) lt.violations++;
  }
  return lt;
}

MeshConvergence mesh_convergence(const OperatorSpec& spec, const SpectralBasis& basis,
                                 const LiftingData& lifting, const GainSet& gains,
                                 const SectorNonlinearity* phi, SimConfig config,
                                 const std::vector<int>& levels) {
  if (levels.size() < 3) throw std::invalid_argument("need >= 3 mesh levels");
  MeshConvergence mc;
  mc.nodes = levels;
  std::vector<std::vector<double>> series;
  for (int m : levels) {
    SimConfig c = config;
    c.mesh_nodes = m;
    c.z0.resize(0);  // rebuild the default profile on each mesh
    Trajectory tr = phi ? simulate_closed_loop(spec, basis, lifting, gains, *phi, c)
                        : simulate_linear(spec, basis, lifting, gains, c);
    series.push_back(tr.l2);
  }
  for (std::size_t l = 0; l + 1 < series.size(); ++l) {
    std::size_t n = std::min(series[l].size(), series[l + 1].size());
    double d = 0;
    for (std::size_t i = 0; i < n; ++i)
      d = std::max(d, std::abs(series[l][i] - series[l + 1][i]));
    mc.diffs.push_back(d);
  }
  for (std::size_t l = 0; l + 1 < mc.diffs.size(); ++l) {
    double hr = double(levels[l + 1] - 1) / double(levels[l] - 1);
    mc.orders.push_back(std::log(mc.diffs[l] / mc.diffs[l + 1]) / std::log(hr));
  }
  bool monotone = true;
  for (std::size_t l = 0; l + 1 < mc.diffs.size(); ++l)
    if (mc.diffs[l + 1] > mc.diffs[l]) monotone = false;
  if (!monotone)
    throw std::runtime_error("non-monotone mesh convergence (unresolved stiffness)");
  return mc;
}

}  // namespace rdstab
