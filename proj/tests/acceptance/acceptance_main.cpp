// Acceptance suite: one check per criterion, each printing a pass/fail line.
// Usage: acceptance [A1 A2 ...]; no arguments runs everything.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/closed_loop_sim.hpp"
#include "core/pipeline.hpp"

using namespace rdstab;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct CaseStudy {
  ExperimentConfig cfg;
  PlantContext ctx;
  GainSet gains;
  SectorSpec sector{1.0, 0.5, 9.02};

  CaseStudy() : cfg(ExperimentConfig::from_text(preset_text("repro-sec5-h1"))) {
    ctx = build_context(cfg, 22);
    gains = gains_from_config(cfg, ctx);
  }
  StabilityModel model(int N, bool psi) const {
    GainSet g = gains;
    g.N = N;
    return build_stability_model(ctx.spec, ctx.basis, ctx.lifting, g, psi);
  }
};

const CaseStudy& study() {
  static CaseStudy cs;
  return cs;
}

bool a1_eigen_oracle() {
  Timer t;
  OperatorSpec spec = make_operator_spec(M_PI / 2, 0.0, Coefficient::constant(1.0),
                                         Coefficient::constant(-3.0), 2001);
  SpectralBasis num = solve_eigenproblem(spec, 30);
  double worst = 0.0;
  for (int n = 1; n <= 30; ++n) {
    double exact = std::pow((2.0 * n - 1.0) * M_PI / 2.0, 2.0) + 1.0;
    worst = std::max(worst, std::abs(num.lambdas[n - 1] - exact) / exact);
  }
  double el = t.seconds();
  std::printf("  max relative eigenvalue error (n<=30): %.3e, runtime %.2fs\n", worst, el);
  return worst <= 1e-8 && el < 5.0;
}

bool a2_gain_reproduction() {
  const CaseStudy& cs = study();
  Timer t;
  GainSet g = gains_from_config(cs.cfg, cs.ctx);
  double el = t.seconds();
  double K = g.K(0, 0), L = g.L(0);
  std::printf("  K = %.6f (reported -0.8250), L = %.6f (reported 1.2958), %.3fs\n", K, L,
              el);
  return std::abs(K + 0.8250) <= 5e-4 && std::abs(L - 1.2958) <= 5e-4 && el < 1.0;
}

bool a3_sector_h1_feasibility() {
  const CaseStudy& cs = study();
  Timer t;
  StabilityModel md = cs.model(3, true);
  FeasibilityCertificate c = search_certificate(md, TheoremId::T3_H1_sector, &cs.sector);
  double el = t.seconds();
  std::printf("  N=3: feasible=%d, theta1 max eig %.3e, runtime %.1fs\n", c.feasible,
              c.margins.theta1_max_eig, el);
  if (c.feasible) return el < 60.0;
  // conservative-solver fallback band: must succeed at some N <= 6 and be flagged
  for (int N = 4; N <= 6; ++N) {
    StabilityModel md2 = cs.model(N, true);
    FeasibilityCertificate c2 =
        search_certificate(md2, TheoremId::T3_H1_sector, &cs.sector);
    if (c2.feasible) {
      std::printf("  FLAG: feasible only at N=%d, not at the reported N=3\n", N);
      return t.seconds() < 60.0;
    }
  }
  return false;
}

bool a4_sector_l2_feasibility() {
  const CaseStudy& cs = study();
  Timer t;
  StabilityModel md = cs.model(16, true);
  FeasibilityCertificate c = search_certificate(md, TheoremId::C4_L2_sector, &cs.sector);
  double el = t.seconds();
  std::printf("  N=16: feasible=%d, theta1 max eig %.3e, runtime %.1fs\n", c.feasible,
              c.margins.theta1_max_eig, el);
  if (c.feasible) return el < 300.0;
  for (int N = 17; N <= 20; ++N) {
    StabilityModel md2 = cs.model(N, true);
    FeasibilityCertificate c2 =
        search_certificate(md2, TheoremId::C4_L2_sector, &cs.sector);
    if (c2.feasible) {
      std::printf("  FLAG: feasible only at N=%d, not at the reported N=16\n", N);
      return t.seconds() < 300.0;
    }
  }
  return false;
}

bool a5_sector_sweep() {
  const CaseStudy& cs = study();
  Timer t;
  const double reported[4] = {0.54, 0.24, 0.12, 0.03};
  const double qts[4] = {-3.0, -5.0, -7.0, -9.0};
  std::vector<double> got;
  for (double qt : qts) {
    ExperimentConfig cfg = cs.cfg;
    cfg.q_tilde = Coefficient::constant(qt);
    cfg.phi_deriv_bound = 0.0;  // each width uses its own instance's bound
    PlantContext ctx = build_context(cfg, 16);
    GainSet g = gains_from_config(cfg, ctx);
    auto bound = [&cfg](double dk) { return deriv_bound_from_config(cfg, dk); };
    SectorSizeResult r =
        max_sector_size(ctx.spec, ctx.basis, ctx.lifting, g, 15, 1.0, bound);
    got.push_back(r.dk_max);
  }
  double el = t.seconds();
  bool dec = got[0] > got[1] && got[1] > got[2] && got[2] > got[3];
  bool band = true;
  for (int i = 0; i < 4; ++i) band = band && std::abs(got[i] - reported[i]) <= 0.15;
  std::printf("  dk_max = {%.3f, %.3f, %.3f, %.3f} vs reported {0.54, 0.24, 0.12, 0.03},"
              " runtime %.0fs\n", got[0], got[1], got[2], got[3], el);
  return dec && band && el < 900.0;
}

bool a6_certified_decay() {
  const CaseStudy& cs = study();
  Timer t;
  SimConfig sc;
  sc.mesh_nodes = 201;
  sc.dt = 1e-3;
  sc.t_final = 10.0;
  sc.record_stride = 10;
  SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);
  Trajectory tr =
      simulate_closed_loop(cs.ctx.spec, cs.ctx.basis, cs.ctx.lifting, cs.gains, phi, sc);
  if (tr.diverged) return false;
  DecayFit fit = decay_rate_fit(tr, 1.0, 8.0);
  double el = t.seconds();
  std::printf("  fitted decay rate %.4f (threshold 0.27), runtime %.1fs\n", fit.rate, el);
  return fit.rate >= 0.27 && el < 120.0;
}

bool a7_divergence_demo() {
  const CaseStudy& cs = study();
  Timer t;
  SimConfig sc;
  sc.mesh_nodes = 201;
  sc.dt = 1e-3;
  sc.t_final = 20.0;
  sc.record_stride = 10;
  sc.z0_scale = 40.0;
  sc.divergence_rel = 1e3;
  SectorNonlinearity wide = SectorNonlinearity::make_default(1.0, 0.5).rescaled(0.72);
  Trajectory tr =
      simulate_closed_loop(cs.ctx.spec, cs.ctx.basis, cs.ctx.lifting, cs.gains, wide, sc);
  double el = t.seconds();
  double growth = tr.l2.back() / tr.l2.front();
  std::printf("  diverged flag=%d within t<=20 (growth factor %.2f), runtime %.1fs\n",
              tr.diverged, growth, el);
  if (!tr.diverged) {
    std::printf("  note: the escape rate just past the critical width 0.709 is "
                "lambda_1+q_c+(k-dk)*B0*K ~ 0.02, so a 1000x growth needs t ~ 350;\n"
                "  the trajectory is genuinely divergent but cannot reach 1000x by "
                "t=20 (see sim_diverge_long in the repro bundle)\n");
  }
  return tr.diverged && el < 120.0;
}

bool a8_oracle_equivalence() {
  const CaseStudy& cs = study();
  Timer t;
  SimConfig sc;
  sc.mesh_nodes = 201;
  sc.dt = 1e-3;
  sc.t_final = 5.0;
  sc.record_stride = 10;
  SectorNonlinearity id = SectorNonlinearity::linear(1.0);
  Trajectory a =
      simulate_closed_loop(cs.ctx.spec, cs.ctx.basis, cs.ctx.lifting, cs.gains, id, sc);
  Trajectory b = simulate_linear(cs.ctx.spec, cs.ctx.basis, cs.ctx.lifting, cs.gains, sc);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    worst = std::max(worst, std::abs(a.l2[i] - b.l2[i]) / (1.0 + b.l2[i]));
    worst = std::max(worst, std::abs(a.h1[i] - b.h1[i]) / (1.0 + b.h1[i]));
  }
  double el = t.seconds();
  std::printf("  worst relative norm difference %.3e, runtime %.1fs\n", worst, el);
  return worst <= 1e-10 && el < 60.0;
}

bool a9_structural_identities() {
  const CaseStudy& cs = study();
  Timer t;
  bool ok = true;
  auto req = [&](bool cond, const char* what, double val) {
    std::printf("  %-42s %s (%.3e)\n", what, cond ? "ok" : "VIOLATED", val);
    ok = ok && cond;
  };

  // beta dual-formula identity
  const int n_id = std::min<int>(60, cs.ctx.lifting.identity_residual.size());
  double idres = cs.ctx.lifting.identity_residual.head(n_id).maxCoeff();
  req(idres <= 1e-6, "beta_n dual-formula identity", idres);

  // Parseval tail consistency: quadrature norm against an independent
  // high-resolution Simpson evaluation
  {
    const auto& spec = cs.ctx.spec;
    auto a_of = [&](double x) {
      return (2.0 * spec.p(x) + 2.0 * x * spec.p.deriv(x) - x * x * spec.q_tilde(x)) /
             (std::cos(spec.theta2) + 2.0 * std::sin(spec.theta2));
    };
    int m = 40001;
    double hh = 1.0 / (m - 1), simpson = 0.0;
    for (int i = 0; i < m; ++i) {
      double wgt = (i == 0 || i == m - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      simpson += wgt * std::pow(a_of(i * hh), 2.0);
    }
    simpson *= hh / 3.0;
    double diff = std::abs(simpson - cs.ctx.lifting.a_norm_sq);
    req(diff <= 1e-8, "Parseval tail consistency (||a||^2)", diff);
    auto [ra, rb] = tail_norms(cs.ctx.lifting, 12);
    req(ra >= 0 && rb >= 0, "Parseval complements nonnegative", std::min(ra, rb));
  }

  // block-spectrum identity of F: every block eigenvalue annihilates F - mu I
  {
    StabilityModel md = cs.model(4, false);
    std::vector<double> expect = {-1.3, -1.3};
    for (int i = 0; i < md.N - md.N0; ++i) {
      expect.push_back(md.A1_diag[i]);
      expect.push_back(md.A1_diag[i]);
    }
    const double scale = md.F.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (double mu : expect) {
      Eigen::MatrixXd shifted =
          md.F - mu * Eigen::MatrixXd::Identity(md.F.rows(), md.F.cols());
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted);
      worst = std::max(worst, svd.singularValues().minCoeff() / scale);
    }
    req(worst <= 1e-8, "block-spectrum identity of F", worst);
  }

  // Lyapunov residual
  {
    StabilityModel md = cs.model(3, false);
    Eigen::MatrixXd I6 = Eigen::MatrixXd::Identity(6, 6);
    Eigen::MatrixXd P = solve_shifted_lyapunov(md.F, md.delta, I6);
    double res = lyapunov_residual(md.F, md.delta, P, I6);
    req(res <= 1e-10, "Lyapunov residual", res);
  }

  // certificate scaling equivalence
  {
    StabilityModel md = cs.model(3, true);
    FeasibilityCertificate c =
        search_certificate(md, TheoremId::T3_H1_sector, &cs.sector);
    bool scaled_ok = c.feasible;
    for (double gs : {0.25, 4.0}) {
      CertScalars s2{c.scalars.alpha, gs * c.scalars.beta, gs, gs * c.scalars.tau};
      scaled_ok = scaled_ok &&
                  verify_certificate(md, c.theorem, &cs.sector, gs * c.P, s2).feasible;
    }
    req(scaled_ok, "certificate scaling equivalence", c.margins.theta1_max_eig);
  }

  // sector psi-form / two-sided agreement
  {
    SectorValidation good =
        validate_sector(SectorNonlinearity::make_default(1.0, 0.5), 1.0, 0.5);
    SectorValidation bad = validate_sector(SectorNonlinearity::linear(2.0), 1.0, 0.5);
    req(good.two_sided_ok == good.psi_form_ok && bad.two_sided_ok == bad.psi_form_ok &&
            good.pass && !bad.pass,
        "sector psi-form/two-sided agreement", good.worst_psi);
  }

  // modal link along a trajectory
  {
    SimConfig sc;
    sc.mesh_nodes = 201;
    sc.dt = 1e-3;
    sc.t_final = 5.0;
    sc.record_stride = 10;
    SectorNonlinearity phi = SectorNonlinearity::make_default(1.0, 0.5);
    Trajectory tr = simulate_closed_loop(cs.ctx.spec, cs.ctx.basis, cs.ctx.lifting,
                                         cs.gains, phi, sc);
    double h = 1.0 / (sc.mesh_nodes - 1);
    double worst = 0.0;
    for (std::size_t r = 0; r < tr.t.size(); ++r)
      for (int n = 0; n < tr.N; ++n)
        worst = std::max(worst, std::abs(tr.w_modes(n, r) - tr.z_modes(n, r) -
                                         tr.diag.b_n[n] * tr.uphi[r]));
    req(worst <= 50.0 * h * h, "modal link w_n = z_n + b_n u_phi", worst);
  }

  std::printf("  runtime %.0fs\n", t.seconds());
  return ok;
}

bool a10_norm_boundedness() {
  const CaseStudy& cs = study();
  Timer t;
  auto norms =
      lyapunov_norm_study(cs.ctx.spec, cs.ctx.basis, cs.ctx.lifting, cs.gains, 2, 20);
  double lo = norms[0], hi = norms[0];
  for (double v : norms) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // oracle-run constant recorded on first calibration: ||P^N|| ~ 1.5415 for all N
  std::printf("  ||P^N|| in [%.4f, %.4f], ratio %.6f (recorded oracle 1.5415), %.0fs\n",
              lo, hi, hi / lo, t.seconds());
  return hi / lo <= 10.0 && std::abs(norms[0] - 1.5415) < 0.01;
}

}  // namespace

int main(int argc, char** argv) {
  std::map<std::string, std::function<bool()>> checks = {
      {"A1", a1_eigen_oracle},        {"A2", a2_gain_reproduction},
      {"A3", a3_sector_h1_feasibility}, {"A4", a4_sector_l2_feasibility},
      {"A5", a5_sector_sweep},        {"A6", a6_certified_decay},
      {"A7", a7_divergence_demo},     {"A8", a8_oracle_equivalence},
      {"A9", a9_structural_identities}, {"A10", a10_norm_boundedness},
  };
  std::vector<std::string> names;
  if (argc > 1)
    for (int i = 1; i < argc; ++i) names.push_back(argv[i]);
  else
    for (auto& [k, v] : checks) names.push_back(k);
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
  });

  int failed = 0;
  for (const auto& name : names) {
    auto it = checks.find(name);
    if (it == checks.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
      return 2;
    }
    std::printf("== %s ==\n", name.c_str());
    bool ok = false;
    try {
      ok = it->second();
    } catch (const std::exception& e) {
      std::printf("  exception: %s\n", e.what());
    }
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
    if (!ok) failed++;
  }
  return failed == 0 ? 0 : 1;
}
