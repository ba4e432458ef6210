#include "core/certificates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdstab {

const char* theorem_name(TheoremId t) {
  switch (t) {
    case TheoremId::T1_H1_linear: return "t1";
    case TheoremId::T2_L2_linear: return "t2";
    case TheoremId::T3_H1_sector: return "t3";
    case TheoremId::C4_L2_sector: return "c4";
  }
  return "?";
}

TheoremId theorem_from_name(const std::string& s) {
  if (s == "t1") return TheoremId::T1_H1_linear;
  if (s == "t2") return TheoremId::T2_L2_linear;
  if (s == "t3") return TheoremId::T3_H1_sector;
  if (s == "c4") return TheoremId::C4_L2_sector;
  throw std::invalid_argument("unknown theorem id '" + s + "' (use t1|t2|t3|c4)");
}

bool theorem_is_sector(TheoremId t) {
  return t == TheoremId::T3_H1_sector || t == TheoremId::C4_L2_sector;
}
bool theorem_is_l2(TheoremId t) {
  return t == TheoremId::T2_L2_linear || t == TheoremId::C4_L2_sector;
}
double theorem_alpha_min(TheoremId t) {
  switch (t) {
    case TheoremId::T1_H1_linear: return 1.0;
    case TheoremId::T3_H1_sector: return 1.5;
    default: return 0.0;
  }
}

void SectorSpec::validate() const {
  if (!(k_phi > 0)) throw std::invalid_argument("k_phi must be positive");
  if (!(dk_phi > 0 && dk_phi < k_phi))
    throw std::invalid_argument("dk_phi must lie in (0, k_phi)");
  if (!(phi_deriv_bound > 0))
    throw std::invalid_argument("phi_deriv_bound must be positive");
}

namespace {

double scalar_theta2(const StabilityModel& md, const CertScalars& s, TheoremId t) {
  const double lam = md.lambda_Np1, qc = md.q_c, d = md.delta;
  switch (t) {
    case TheoremId::T1_H1_linear:
      return 2 * s.gamma * (-(1.0 - 1.0 / s.alpha) * lam + qc + d) + s.beta * md.m_tail;
    case TheoremId::T3_H1_sector:
      return 2 * s.gamma * (-(1.0 - 1.5 / s.alpha) * lam + qc + d) + s.beta * md.m_tail;
    case TheoremId::T2_L2_linear:
      return 2 * s.gamma * (-lam + qc + d + 1.0 / s.alpha) +
             s.beta * md.m_tail34 * std::pow(lam, 0.75);
    case TheoremId::C4_L2_sector:
      return 2 * s.gamma * (-lam + qc + d + 1.5 / s.alpha) +
             s.beta * md.m_tail34 * std::pow(lam, 0.75);
  }
  return 0.0;
}

double scalar_theta3(const StabilityModel& md, const CertScalars& s) {
  return 2 * s.gamma - s.beta * md.m_tail34 / std::pow(md.lambda_Np1, 0.25);
}

struct ThetaCoeffs {
  double cK = 0.0;  // multiplies Ktilde^T Ktilde on the X block
  double cE = 0.0;  // multiplies Erow^T Erow on the full block
  double dpsi = 0.0;  // (psi,psi) diagonal entry (sector only)
};

ThetaCoeffs theta_coeffs(const StabilityModel& md, const SectorSpec* sector,
                         const CertScalars& s, TheoremId t) {
  ThetaCoeffs c;
  if (theorem_is_sector(t)) {
    c.cK = s.alpha * s.gamma * sector->k_phi * sector->k_phi * md.r_a +
           s.tau * sector->dk_phi * sector->dk_phi;
    c.cE = s.alpha * s.gamma * md.r_b * sector->phi_deriv_bound * sector->phi_deriv_bound;
    c.dpsi = s.alpha * s.gamma * md.r_a - s.tau;
  } else {
    c.cK = s.alpha * s.gamma * md.r_a;
    c.cE = s.alpha * s.gamma * md.r_b;
  }
  return c;
}

}  // namespace

ThetaBlocks assemble_theta(const StabilityModel& md, const SectorSpec* sector,
                           const Eigen::MatrixXd& P, const CertScalars& s, TheoremId t) {
  const bool sec = theorem_is_sector(t);
  if (sec != md.includes_psi)
    throw std::invalid_argument("model/theorem mismatch (includes_psi)");
  if (sec && sector == nullptr) throw std::invalid_argument("sector spec required");
  if (theorem_is_l2(t) && !std::isfinite(md.m_tail34))
    throw std::runtime_error("m_tail34 unavailable for this spec (tail table too small)");
  const int n2 = md.dim();
  const int dim = md.theta_dim();
  if (P.rows() != n2 || P.cols() != n2)
    throw std::invalid_argument("P dimension mismatch");

  ThetaCoeffs c = theta_coeffs(md, sector, s, t);
  ThetaBlocks out;
  out.theta1 = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd X = md.F.transpose() * P + P * md.F + 2.0 * md.delta * P +
                      c.cK * md.Ktilde.transpose() * md.Ktilde;
  out.theta1.topLeftCorner(n2, n2) = X;
  Eigen::VectorXd PL = P * md.Lcal;
  out.theta1.block(0, n2, n2, 1) = PL;
  out.theta1.block(n2, 0, 1, n2) = PL.transpose();
  out.theta1(n2, n2) = -s.beta;
  if (sec) {
    Eigen::VectorXd PLp = P * md.Lpsi;
    out.theta1.block(0, n2 + 1, n2, 1) = PLp;
    out.theta1.block(n2 + 1, 0, 1, n2) = PLp.transpose();
    out.theta1(n2 + 1, n2 + 1) = c.dpsi;
  }
  out.theta1 += c.cE * md.Erow.transpose() * md.Erow;

  out.theta2 = scalar_theta2(md, s, t);
  out.has_theta3 = theorem_is_l2(t);
  if (out.has_theta3) out.theta3 = scalar_theta3(md, s);
  return out;
}

FeasibilityCertificate verify_certificate(const StabilityModel& model, TheoremId theorem,
                                          const SectorSpec* sector,
                                          const Eigen::MatrixXd& P, const CertScalars& s) {
  FeasibilityCertificate c;
  c.theorem = theorem;
  c.scalars = s;
  c.P = 0.5 * (P + P.transpose());
  ThetaBlocks th = assemble_theta(model, sector, c.P, s, theorem);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(th.theta1, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(c.P, Eigen::EigenvaluesOnly);
  c.margins.theta1_max_eig = es.eigenvalues().maxCoeff();
  c.margins.p_min_eig = ep.eigenvalues().minCoeff();
  c.margins.theta2 = th.theta2;
  c.margins.theta3 = th.has_theta3 ? th.theta3 : 0.0;
  bool scal_ok = s.alpha > theorem_alpha_min(theorem) && s.beta > 0 && s.gamma > 0 &&
                 (!theorem_is_sector(theorem) || s.tau > 0);
  c.feasible = scal_ok && c.margins.p_min_eig > 0 &&
               c.margins.theta1_max_eig <= kTheta1Slack &&
               c.margins.theta2 <= kScalarSlack &&
               (!th.has_theta3 || c.margins.theta3 >= -kScalarSlack);
  return c;
}

FeasibilityCertificate constructive_certificate(const StabilityModel& model,
                                                TheoremId theorem,
                                                const SectorSpec* sector) {
  const double N = model.N;
  CertScalars s;
  switch (theorem) {
    case TheoremId::T1_H1_linear:
      s = {2.0, std::sqrt(N), 1.0 / N, 0.0};
      break;
    case TheoremId::T2_L2_linear:
      s = {1.0, std::pow(N, 0.125), std::pow(N, -0.25), 0.0};
      break;
    case TheoremId::T3_H1_sector:
      s = {2.0, std::sqrt(N), 1.0 / N, 0.0};
      break;
    case TheoremId::C4_L2_sector:
      s = {2.0, std::pow(N, 0.125), std::pow(N, -0.25), 0.0};
      break;
  }
  Eigen::MatrixXd P = solve_shifted_lyapunov(
      model.F, model.delta, Eigen::MatrixXd::Identity(model.dim(), model.dim()));
  if (theorem_is_sector(theorem)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(P, Eigen::EigenvaluesOnly);
    double MP = std::max(std::abs(ep.eigenvalues().maxCoeff()),
                         std::abs(ep.eigenvalues().minCoeff()));
    double Mpsi = model.Lpsi.norm();
    s.tau = 1.0 + 4.0 * MP * MP * Mpsi * Mpsi + model.a_norm_sq;
  }
  FeasibilityCertificate c = verify_certificate(model, theorem, sector, P, s);
  c.note = "constructive recipe";
  return c;
}

namespace {

// analytic upper bound on beta from the scalar constraints at gamma = 1
double beta_max(const StabilityModel& md, TheoremId t, double alpha) {
  const double lam = md.lambda_Np1, qc = md.q_c, d = md.delta;
  switch (t) {
    case TheoremId::T1_H1_linear: {
      double c0 = 2 * (-(1.0 - 1.0 / alpha) * lam + qc + d);
      return c0 < 0 ? -c0 / md.m_tail : -1.0;
    }
    case TheoremId::T3_H1_sector: {
      double c0 = 2 * (-(1.0 - 1.5 / alpha) * lam + qc + d);
      return c0 < 0 ? -c0 / md.m_tail : -1.0;
    }
    case TheoremId::T2_L2_linear: {
      double c0 = 2 * (-lam + qc + d + 1.0 / alpha);
      if (c0 >= 0) return -1.0;
      return std::min(-c0 / (md.m_tail34 * std::pow(lam, 0.75)),
                      2.0 * std::pow(lam, 0.25) / md.m_tail34);
    }
    case TheoremId::C4_L2_sector: {
      double c0 = 2 * (-lam + qc + d + 1.5 / alpha);
      if (c0 >= 0) return -1.0;
      return std::min(-c0 / (md.m_tail34 * std::pow(lam, 0.75)),
                      2.0 * std::pow(lam, 0.25) / md.m_tail34);
    }
  }
  return -1.0;
}

double alpha_lower(const StabilityModel& md, TheoremId t) {
  const double gap = md.lambda_Np1 - md.q_c - md.delta;  // > 0 since N >= N0+1
  double lo;
  switch (t) {
    case TheoremId::T1_H1_linear: lo = md.lambda_Np1 / gap; break;
    case TheoremId::T3_H1_sector: lo = 1.5 * md.lambda_Np1 / gap; break;
    case TheoremId::T2_L2_linear: lo = 1.0 / gap; break;
    case TheoremId::C4_L2_sector: lo = 1.5 / gap; break;
  }
  return std::max({lo * 1.02, theorem_alpha_min(t) * 1.000001, 1e-6});
}

// Schur-complement reduction of Theta1 <= 0 to a Riccati inequality in P:
//   (F + dI + S)^T P + P (F + dI + S) + P R P + Q0 <= 0
struct ReductionPieces {
  Eigen::MatrixXd S, R, Q0;
  bool ok = false;
};

ReductionPieces reduce_theta(const StabilityModel& md, const SectorSpec* sector,
                             TheoremId t, double alpha, double beta, double tau) {
  ReductionPieces rp;
  const int n2 = md.dim();
  CertScalars s{alpha, beta, 1.0, tau};
  ThetaCoeffs c = theta_coeffs(md, sector, s, t);
  const Eigen::VectorXd EX = md.Erow.head(n2).transpose();
  const double Ez = md.Erow[n2];
  const bool sec = theorem_is_sector(t);
  const int ng = sec ? 2 : 1;
  const int dd = ng + 1;

  Eigen::MatrixXd D(dd, dd);
  if (sec) {
    const double Ep = md.Erow[n2 + 1];
    D << -beta, 0.0, std::sqrt(c.cE) * Ez,
         0.0, c.dpsi, std::sqrt(c.cE) * Ep,
         std::sqrt(c.cE) * Ez, std::sqrt(c.cE) * Ep, -1.0;
  } else {
    D << -beta, std::sqrt(c.cE) * Ez,
         std::sqrt(c.cE) * Ez, -1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(D, Eigen::EigenvaluesOnly);
  if (!(ed.eigenvalues().maxCoeff() < -1e-12)) return rp;  // D must be negative definite

  Eigen::MatrixXd H = -D.inverse();
  Eigen::MatrixXd G(n2, ng);
  G.col(0) = md.Lcal;
  if (sec) G.col(1) = md.Lpsi;
  Eigen::VectorXd e = std::sqrt(c.cE) * EX;

  Eigen::MatrixXd Hgg = H.topLeftCorner(ng, ng);
  Eigen::VectorXd Hge = H.block(0, ng, ng, 1);
  double Hee = H(ng, ng);

  rp.S = G * Hge * e.transpose();
  rp.R = G * Hgg * G.transpose();
  rp.Q0 = c.cK * md.Ktilde.transpose() * md.Ktilde + Hee * e * e.transpose();
  rp.ok = true;
  return rp;
}

std::optional<Eigen::MatrixXd> fp_solve(const LyapunovSolver& lyap,
                                        const ReductionPieces& rp, int n2, double eps,
                                        int iters) {
  Eigen::MatrixXd Qe = rp.Q0 + eps * Eigen::MatrixXd::Identity(n2, n2);
  Eigen::MatrixXd P = lyap.solve(Qe);
  for (int it = 0; it < iters; ++it) {
    Eigen::MatrixXd rhs =
        Qe + P * rp.S + rp.S.transpose() * P + P * rp.R * P;
    Eigen::MatrixXd Pn = lyap.solve(rhs);
    if (!Pn.allFinite() || Pn.cwiseAbs().maxCoeff() > 1e13) return std::nullopt;
    double d = (Pn - P).cwiseAbs().maxCoeff() /
               std::max(1.0, Pn.cwiseAbs().maxCoeff());
    P = Pn;
    if (d < 1e-12) return P;
  }
  return P;  // not fully converged; the exact margin check decides
}

struct EvalResult {
  double margin = std::numeric_limits<double>::infinity();
  FeasibilityCertificate cert;
};

double combined_margin(const FeasibilityCertificate& c, TheoremId t) {
  double m = std::max(c.margins.theta1_max_eig, c.margins.theta2);
  if (theorem_is_l2(t)) m = std::max(m, -c.margins.theta3);
  if (!(c.margins.p_min_eig > 0)) m = std::max(m, 1.0);
  return m;
}

FeasibilityCertificate search_one(const StabilityModel& md, TheoremId t,
                                  const SectorSpec* sector, const SearchOptions& opts) {
  const int n2 = md.dim();
  LyapunovSolver lyap(md.F, md.delta);

  auto eval = [&](double alpha, double tau, double eps) -> EvalResult {
    EvalResult r;
    double bmax = beta_max(md, t, alpha);
    if (bmax <= 0) return r;
    double beta = opts.beta_fraction * bmax;
    ReductionPieces rp = reduce_theta(md, sector, t, alpha, beta, tau);
    if (!rp.ok) return r;
    auto P = fp_solve(lyap, rp, n2, eps, opts.fp_iters);
    if (!P) return r;
    r.cert = verify_certificate(md, t, sector, *P, {alpha, beta, 1.0, tau});
    r.margin = combined_margin(r.cert, t);
    return r;
  };

  const bool sec = theorem_is_sector(t);
  const double alo = alpha_lower(md, t);
  const double ahi = std::max(opts.alpha_max, alo * 4.0);
  std::vector<double> alphas(opts.alpha_points);
  for (int i = 0; i < opts.alpha_points; ++i)
    alphas[i] = alo * std::pow(ahi / alo, double(i) / (opts.alpha_points - 1));
  std::vector<double> taus;
  if (sec) {
    taus.resize(opts.tau_points);
    for (int i = 0; i < opts.tau_points; ++i)
      taus[i] = opts.tau_min *
                std::pow(opts.tau_max / opts.tau_min, double(i) / (opts.tau_points - 1));
  } else {
    taus = {0.0};
  }

  EvalResult best;
  double best_alpha = alphas[0], best_tau = taus[0];
  const double eps0 = 1e-4;
  for (double a : alphas) {
    for (double tau : taus) {
      EvalResult r = eval(a, tau, eps0);
      if (r.margin < best.margin) {
        best = r;
        best_alpha = a;
        best_tau = tau;
      }
      if (best.margin <= opts.accept_margin) goto refined;
    }
  }

  // golden refinement on log(tau), then log(alpha)
  if (sec) {
    double lo = std::log(std::max(best_tau / 8.0, opts.tau_min));
    double hi = std::log(std::min(best_tau * 8.0, opts.tau_max));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    EvalResult f1 = eval(best_alpha, std::exp(x1), eps0);
    EvalResult f2 = eval(best_alpha, std::exp(x2), eps0);
    for (int i = 0; i < opts.golden_iters; ++i) {
      if (f1.margin < f2.margin) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = eval(best_alpha, std::exp(x1), eps0);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = eval(best_alpha, std::exp(x2), eps0);
      }
      const EvalResult& cur = f1.margin < f2.margin ? f1 : f2;
      double curtau = std::exp(f1.margin < f2.margin ? x1 : x2);
      if (cur.margin < best.margin) {
        best = cur;
        best_tau = curtau;
      }
      if (best.margin <= opts.accept_margin) break;
    }
  }
  if (best.margin > opts.accept_margin) {
    double lo = std::log(std::max(best_alpha / 4.0, alo));
    double hi = std::log(std::min(best_alpha * 4.0, ahi));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    EvalResult f1 = eval(std::exp(x1), best_tau, eps0);
    EvalResult f2 = eval(std::exp(x2), best_tau, eps0);
    for (int i = 0; i < opts.golden_iters; ++i) {
      if (f1.margin < f2.margin) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = eval(std::exp(x1), best_tau, eps0);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = eval(std::exp(x2), best_tau, eps0);
      }
      const EvalResult& cur = f1.margin < f2.margin ? f1 : f2;
      double cura = std::exp(f1.margin < f2.margin ? x1 : x2);
      if (cur.margin < best.margin) {
        best = cur;
        best_alpha = cura;
      }
      if (best.margin <= opts.accept_margin) break;
    }
  }

refined:
  // margin enlargement: re-run the P-step with larger shifts, keep the best
  for (double eps : {1e-2, 1.0, 1e2}) {
    EvalResult r = eval(best_alpha, best_tau, eps);
    bool better = r.cert.feasible && (!best.cert.feasible || r.margin < best.margin);
    if (better) best = r;
  }

  if (!std::isfinite(best.margin)) {
    FeasibilityCertificate c;
    c.theorem = t;
    c.feasible = false;
    c.note = "search exhausted: no admissible scalar point";
    return c;
  }
  best.cert.note = best.cert.feasible
                       ? "gamma=1 search"
                       : "search exhausted; best margin " + std::to_string(best.margin);
  return best.cert;
}

}  // namespace

FeasibilityCertificate search_certificate(const StabilityModel& model, TheoremId theorem,
                                          const SectorSpec* sector,
                                          const SearchOptions& opts) {
  if (theorem_is_sector(theorem)) {
    if (sector == nullptr) throw std::invalid_argument("sector spec required");
    sector->validate();
  }
  FeasibilityCertificate cons = constructive_certificate(model, theorem, sector);
  if (cons.feasible) return cons;

  if (theorem == TheoremId::C4_L2_sector) {
    FeasibilityCertificate pre =
        search_one(model, TheoremId::T3_H1_sector, sector, opts);
    if (!pre.feasible) {
      FeasibilityCertificate c;
      c.theorem = theorem;
      c.feasible = false;
      c.note = "prerequisite (H1 sector conditions) infeasible at this N";
      return c;
    }
    FeasibilityCertificate c = search_one(model, theorem, sector, opts);
    c.note += "; H1-sector prerequisite feasible";
    return c;
  }
  return search_one(model, theorem, sector, opts);
}

MinFeasibleResult min_feasible_N(const OperatorSpec& spec, const SpectralBasis& basis,
                                 const LiftingData& lifting, const GainSet& gains,
                                 TheoremId theorem, const SectorSpec* sector, int N_max,
                                 const SearchOptions& opts) {
  MinFeasibleResult out;
  for (int N = gains.N0 + 1; N <= N_max; ++N) {
    GainSet g = gains;
    g.N = N;
    StabilityModel md =
        build_stability_model(spec, basis, lifting, g, theorem_is_sector(theorem));
    FeasibilityCertificate c = search_certificate(md, theorem, sector, opts);
    double margin = c.feasible ? combined_margin(c, theorem)
                               : std::numeric_limits<double>::infinity();
    out.margins.emplace_back(N, c.feasible ? margin : 1e300);
    if (c.feasible) {
      out.found = true;
      out.N = N;
      out.cert = c;
      return out;
    }
  }
  return out;
}

SectorSizeResult max_sector_size(const OperatorSpec& spec, const SpectralBasis& basis,
                                 const LiftingData& lifting, const GainSet& gains, int N,
                                 double k_phi,
                                 const std::function<double(double)>& deriv_bound,
                                 TheoremId theorem, double resolution,
                                 const SearchOptions& opts) {
  if (!theorem_is_sector(theorem))
    throw std::invalid_argument("sector size study needs a sector theorem");
  GainSet g = gains;
  g.N = N;
  StabilityModel md = build_stability_model(spec, basis, lifting, g, true);

  SectorSizeResult out;
  auto probe = [&](double dk) -> FeasibilityCertificate {
    SectorSpec sp{k_phi, dk, deriv_bound(dk)};
    return search_certificate(md, theorem, &sp, opts);
  };

  double lo = resolution, hi = k_phi - resolution;
  FeasibilityCertificate clo = probe(lo);
  if (!clo.feasible) {
    out.any_feasible = false;
    out.dk_max = 0.0;
    return out;
  }
  out.any_feasible = true;
  FeasibilityCertificate chi = probe(hi);
  if (chi.feasible) {
    out.dk_max = hi;
    out.cert = chi;
    out.deriv_bound_at_max = deriv_bound(hi);
    return out;
  }
  while (hi - lo > resolution) {
    double mid = 0.5 * (lo + hi);
    FeasibilityCertificate cm = probe(mid);
    if (cm.feasible) {
      lo = mid;
      clo = cm;
    } else {
      hi = mid;
    }
  }
  out.dk_max = lo;
  out.cert = clo;
  out.deriv_bound_at_max = deriv_bound(lo);
  return out;
}

std::vector<double> lyapunov_norm_study(const OperatorSpec& spec,
                                        const SpectralBasis& basis,
                                        const LiftingData& lifting, const GainSet& gains,
                                        int N_lo, int N_hi) {
  std::vector<double> norms;
  for (int N = N_lo; N <= N_hi; ++N) {
    GainSet g = gains;
    g.N = N;
    StabilityModel md = build_stability_model(spec, basis, lifting, g, false);
    Eigen::MatrixXd P = solve_shifted_lyapunov(
        md.F, md.delta, Eigen::MatrixXd::Identity(md.dim(), md.dim()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
    norms.push_back(std::max(std::abs(es.eigenvalues().maxCoeff()),
                             std::abs(es.eigenvalues().minCoeff())));
  }
  return norms;
}

}  // namespace rdstab
