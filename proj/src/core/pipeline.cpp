#include "core/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <stdexcept>

#include "core/serialize.hpp"

namespace rdstab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string csv_num(double v) {
  char buf[32];
  snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plots trajectory.csv produced by the simulate command."""
import csv, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "trajectory.csv"
cols = {}
with open(path) as f:
    r = csv.DictReader(f)
    for row in r:
        for k, v in row.items():
            cols.setdefault(k, []).append(float(v))

fig, axes = plt.subplots(2, 1, figsize=(8, 8), sharex=True)
axes[0].semilogy(cols["t"], cols["h1_norm"], label="H1 norm")
axes[0].semilogy(cols["t"], cols["l2_norm"], label="L2 norm")
axes[0].set_ylabel("norm")
axes[0].legend()
axes[1].plot(cols["t"], cols["u"], label="u")
axes[1].plot(cols["t"], cols["u_phi"], label="u_phi")
axes[1].set_xlabel("t")
axes[1].legend()
fig.tight_layout()
fig.savefig("trajectory.png", dpi=120)
print("wrote trajectory.png")
)PY";

}  // namespace

PlantContext build_context(const ExperimentConfig& cfg, int min_modes) {
  PlantContext ctx;
  ctx.spec = cfg.make_spec();
  int n = std::max({40, cfg.n_modes, min_modes});
  if (!ctx.spec.constant_coefficients())
    n = std::max(n, min_modes > 0 ? min_modes + 220 : 260);
  ctx.basis = solve_eigenproblem(ctx.spec, n);
  ctx.lifting = lifting_coefficients(ctx.spec, ctx.basis);
  return ctx;
}

GainSet gains_from_config(const ExperimentConfig& cfg, const PlantContext& ctx) {
  GainOptions o;
  o.delta = cfg.delta;
  o.poles = cfg.poles;
  o.N = cfg.N;
  o.N0_override = cfg.N0_override;
  o.k_phi = cfg.has_sector ? cfg.k_phi : 1.0;
  return synthesize_gains(ctx.spec, ctx.basis, o);
}

SectorNonlinearity phi_from_config(const ExperimentConfig& cfg) {
  return SectorNonlinearity::make_default(cfg.k_phi, cfg.dk_phi);
}

double deriv_bound_from_config(const ExperimentConfig& cfg, double dk) {
  if (cfg.phi_deriv_bound > 0) return cfg.phi_deriv_bound;
  return SectorNonlinearity::make_default(cfg.k_phi, dk).measured_deriv_bound();
}

json run_eig(const ExperimentConfig& cfg, const std::string& out_dir) {
  PlantContext ctx = build_context(cfg, std::max(cfg.N, 0) + 1);
  BasisDiagnostics diag = verify_basis(ctx.basis, ctx.spec);

  json j;
  j["schema_version"] = 1;
  j["n_modes"] = ctx.basis.n_modes;
  j["q_c"] = ctx.spec.q_c;
  j["lambdas"] = vector_to_json(ctx.basis.lambdas);
  j["phi0"] = vector_to_json(ctx.basis.phi0);
  j["phi1"] = vector_to_json(ctx.basis.phi1);
  j["dphi1"] = vector_to_json(ctx.basis.dphi1);
  j["beta_n"] = vector_to_json(ctx.lifting.beta_n);
  j["a_n"] = vector_to_json(ctx.lifting.a_n);
  j["b_n"] = vector_to_json(ctx.lifting.b_n);
  j["a_norm_sq"] = ctx.lifting.a_norm_sq;
  j["b_norm_sq"] = ctx.lifting.b_norm_sq;
  json d;
  d["pass"] = diag.pass;
  d["gram_deviation"] = diag.gram_deviation;
  d["gram_tol"] = diag.gram_tol;
  d["monotone_ok"] = diag.monotone_ok;
  d["bracket_ok"] = diag.bracket_ok;
  d["residual_ok"] = diag.residual_ok;
  d["max_eigen_residual"] = diag.eigen_residual.maxCoeff();
  d["max_identity_residual"] = ctx.lifting.identity_residual.maxCoeff();
  j["diagnostics"] = d;

  if (ctx.spec.constant_coefficients()) {
    SpectralBasis cf = closed_form_basis(ctx.spec, std::min(ctx.basis.n_modes, 30), 201);
    double worst = 0;
    for (int n = 0; n < cf.n_modes; ++n)
      worst = std::max(worst, std::abs(ctx.basis.lambdas[n] - cf.lambdas[n]) /
                                  cf.lambdas[n]);
    j["closed_form_max_rel_err"] = worst;
  }
  write_json(fs::path(out_dir) / "basis.json", j);
  json summary = {{"command", "eig"},
                  {"n_modes", ctx.basis.n_modes},
                  {"lambda_1", ctx.basis.lambdas[0]},
                  {"verify_pass", diag.pass}};
  if (j.contains("closed_form_max_rel_err"))
    summary["closed_form_max_rel_err"] = j["closed_form_max_rel_err"];
  return summary;
}

json run_synth(const ExperimentConfig& cfg, const std::string& out_dir) {
  PlantContext ctx = build_context(cfg, std::max(cfg.N, 0) + 1);
  GainSet g = gains_from_config(cfg, ctx);
  json j = gains_to_json(g, ctx.spec.q_c);
  write_json(fs::path(out_dir) / "gains.json", j);
  json summary = {{"command", "synth"}, {"N0", g.N0},      {"N", g.N},
                  {"K", j["K"]},        {"L", j["L"]},     {"q_c", ctx.spec.q_c},
                  {"delta", g.delta},   {"k_phi", g.k_phi}};
  return summary;
}

json run_check(const ExperimentConfig& cfg, const std::string& out_dir,
               const std::string& cert_file) {
  json summary;
  summary["command"] = "check";
  if (!cert_file.empty()) {
    std::ifstream in(cert_file);
    if (!in) throw std::runtime_error("cannot open certificate file " + cert_file);
    json j = json::parse(in);
    LoadedCertificate lc = certificate_from_json(j);
    FeasibilityCertificate v =
        verify_certificate(lc.model, lc.cert.theorem, lc.has_sector ? &lc.sector : nullptr,
                           lc.cert.P, lc.cert.scalars);
    summary["theorem"] = theorem_name(v.theorem);
    summary["feasible"] = v.feasible;
    summary["margins"] = {{"theta1_max_eig", v.margins.theta1_max_eig},
                          {"theta2", v.margins.theta2},
                          {"theta3", v.margins.theta3},
                          {"p_min_eig", v.margins.p_min_eig}};
    summary["source"] = "certificate file";
    return summary;
  }

  const int N = cfg.N > 0 ? cfg.N : 3;
  PlantContext ctx = build_context(cfg, N + 1);
  GainSet g = gains_from_config(cfg, ctx);
  g.N = N;
  const bool sector = theorem_is_sector(cfg.theorem);
  StabilityModel model = build_stability_model(ctx.spec, ctx.basis, ctx.lifting, g, sector);
  SectorSpec sp{cfg.k_phi, cfg.dk_phi, deriv_bound_from_config(cfg, cfg.dk_phi)};
  FeasibilityCertificate cert =
      search_certificate(model, cfg.theorem, sector ? &sp : nullptr);
  write_json(fs::path(out_dir) / "certificate.json",
             certificate_to_json(cert, model, sector ? &sp : nullptr));
  FeasibilityCertificate cons =
      constructive_certificate(model, cfg.theorem, sector ? &sp : nullptr);
  summary["constructive"] = {{"feasible", cons.feasible},
                             {"theta1_max_eig", cons.margins.theta1_max_eig},
                             {"theta2", cons.margins.theta2}};
  summary["theorem"] = theorem_name(cfg.theorem);
  summary["N"] = N;
  summary["feasible"] = cert.feasible;
  summary["alpha"] = cert.scalars.alpha;
  summary["beta"] = cert.scalars.beta;
  summary["gamma"] = cert.scalars.gamma;
  summary["tau"] = cert.scalars.tau;
  summary["margins"] = {{"theta1_max_eig", cert.margins.theta1_max_eig},
                        {"theta2", cert.margins.theta2},
                        {"theta3", cert.margins.theta3},
                        {"p_min_eig", cert.margins.p_min_eig}};
  summary["note"] = cert.note;
  return summary;
}

json run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const int N = cfg.N > 0 ? cfg.N : 3;
  PlantContext ctx = build_context(cfg, N + 1);
  GainSet g = gains_from_config(cfg, ctx);
  g.N = N;
  SimConfig sc;
  sc.mesh_nodes = cfg.mesh_nodes;
  sc.dt = cfg.dt;
  sc.t_final = cfg.t_final;
  sc.record_stride = cfg.record_stride;
  sc.z0_scale = cfg.z0_scale;
  sc.divergence_rel = cfg.divergence_rel;

  Trajectory tr;
  if (cfg.has_sector) {
    SectorNonlinearity phi = phi_from_config(cfg);
    write_json(fs::path(out_dir) / "phi.json", phi_to_json(phi));
    tr = simulate_closed_loop(ctx.spec, ctx.basis, ctx.lifting, g, phi, sc);
  } else {
    tr = simulate_linear(ctx.spec, ctx.basis, ctx.lifting, g, sc);
  }

  // trajectory.csv
  std::string csv = "t,l2_norm,h1_norm,u,u_phi,y\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    csv += csv_num(tr.t[i]) + "," + csv_num(tr.l2[i]) + "," + csv_num(tr.h1[i]) + "," +
           csv_num(tr.u[i]) + "," + csv_num(tr.uphi[i]) + "," + csv_num(tr.y[i]) + "\n";
  }
  write_text(fs::path(out_dir) / "trajectory.csv", csv);
  write_text(fs::path(out_dir) / "plot_trajectory.py", kPlotScript);

  json snaps;
  snaps["schema_version"] = 1;
  snaps["times"] = tr.snapshot_times;
  json profs = json::array();
  for (const auto& s : tr.snapshots) profs.push_back(vector_to_json(s));
  snaps["profiles"] = profs;
  write_json(fs::path(out_dir) / "snapshots.json", snaps);

  json summary;
  summary["command"] = "simulate";
  summary["records"] = tr.t.size();
  summary["diverged"] = tr.diverged;
  if (tr.diverged) summary["diverged_time"] = tr.diverged_time;
  summary["compat_correction"] = tr.compat_correction;
  summary["final_l2"] = tr.l2.back();
  summary["final_h1"] = tr.h1.back();
  if (!tr.diverged) {
    try {
      DecayFit fit = decay_rate_fit(tr, cfg.fit_t0, cfg.fit_t1);
      summary["decay_rate"] = fit.rate;
      summary["decay_fit_residual"] = fit.residual;
    } catch (const std::exception& e) {
      summary["decay_rate_error"] = e.what();
    }
  }
  return summary;
}

json run_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.sweep_axis.empty() || cfg.sweep_values.empty())
    throw std::invalid_argument("sweep requires sweep.axis and sweep.values");
  json summary;
  summary["command"] = "sweep";
  summary["axis"] = cfg.sweep_axis;

  if (cfg.sweep_axis == "q_tilde") {
    auto eval_one = [&cfg](double qt) -> json {
      ExperimentConfig c = cfg;
      c.q_tilde = Coefficient::constant(qt);
      PlantContext ctx = build_context(c, c.sweep_N + 1);
      GainSet g = gains_from_config(c, ctx);
      auto bound = [&c](double dk) { return deriv_bound_from_config(c, dk); };
      SectorSizeResult r = max_sector_size(ctx.spec, ctx.basis, ctx.lifting, g,
                                           c.sweep_N, c.k_phi, bound, c.theorem);
      return json{{"q_tilde", qt},
                  {"q_c", ctx.spec.q_c},
                  {"K", vector_to_json(g.K.transpose())},
                  {"L", vector_to_json(g.L)},
                  {"dk_max", r.dk_max},
                  {"any_feasible", r.any_feasible},
                  {"phi_deriv_bound_at_max", r.deriv_bound_at_max}};
    };
    std::vector<std::future<json>> futs;
    for (double qt : cfg.sweep_values)
      futs.push_back(std::async(std::launch::async, eval_one, qt));
    json rows = json::array();
    std::string csv = "q_tilde,q_c,dk_max,phi_deriv_bound_at_max,any_feasible\n";
    for (auto& f : futs) {
      json r = f.get();
      csv += csv_num(r["q_tilde"].get<double>()) + "," + csv_num(r["q_c"].get<double>()) + "," +
             csv_num(r["dk_max"].get<double>()) + "," + csv_num(r["phi_deriv_bound_at_max"].get<double>()) + "," +
             (r["any_feasible"].get<bool>() ? "1" : "0") + "\n";
      rows.push_back(std::move(r));
    }
    write_text(fs::path(out_dir) / "sweep.csv", csv);
    summary["rows"] = rows;
    write_json(fs::path(out_dir) / "sweep.json", summary);
    return summary;
  }

  if (cfg.sweep_axis == "n") {
    int n_hi = 2;
    for (double v : cfg.sweep_values) n_hi = std::max(n_hi, int(v));
    PlantContext ctx = build_context(cfg, n_hi + 1);
    GainSet g = gains_from_config(cfg, ctx);
    const bool sector = theorem_is_sector(cfg.theorem);
    SectorSpec sp{cfg.k_phi, cfg.dk_phi, deriv_bound_from_config(cfg, cfg.dk_phi)};
    json rows = json::array();
    std::string csv = "N,feasible,theta1_max_eig\n";
    for (double vN : cfg.sweep_values) {
      GainSet gn = g;
      gn.N = int(vN);
      StabilityModel md =
          build_stability_model(ctx.spec, ctx.basis, ctx.lifting, gn, sector);
      FeasibilityCertificate cert =
          search_certificate(md, cfg.theorem, sector ? &sp : nullptr);
      csv += std::to_string(gn.N) + "," + (cert.feasible ? "1" : "0") + "," +
             csv_num(cert.margins.theta1_max_eig) + "\n";
      rows.push_back(json{{"N", gn.N},
                          {"feasible", cert.feasible},
                          {"theta1_max_eig", cert.margins.theta1_max_eig}});
    }
    write_text(fs::path(out_dir) / "sweep.csv", csv);
    summary["rows"] = rows;
    write_json(fs::path(out_dir) / "sweep.json", summary);
    return summary;
  }
  throw std::invalid_argument("unknown sweep axis '" + cfg.sweep_axis + "'");
}

json run_repro(const std::string& out_dir) {
  json rep;
  rep["schema_version"] = 1;
  bool all_pass = true;
  auto mark = [&](bool ok) {
    all_pass = all_pass && ok;
    return ok;
  };
  const fs::path root = fs::path(out_dir);

  ExperimentConfig h1 = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));

  // gains against the reported values
  PlantContext ctx = build_context(h1, 21);
  GainSet g = gains_from_config(h1, ctx);
  {
    json jg = gains_to_json(g, ctx.spec.q_c);
    write_json(root / "gains.json", jg);
    double K = g.K(0, 0), L = g.L(0);
    bool ok = std::abs(K - (-0.8250)) <= 5e-4 && std::abs(L - 1.2958) <= 5e-4;
    rep["gains"] = {{"K", K},       {"L", L},         {"reported_K", -0.8250},
                    {"reported_L", 1.2958}, {"pass", mark(ok)}};
  }

  // eigenvalue oracle
  {
    SpectralBasis cf = closed_form_basis(ctx.spec, 30, 201);
    double worst = 0;
    for (int n = 0; n < 30; ++n)
      worst = std::max(worst,
                       std::abs(ctx.basis.lambdas[n] - cf.lambdas[n]) / cf.lambdas[n]);
    rep["eig_oracle"] = {{"max_rel_err", worst}, {"pass", mark(worst <= 1e-8)}};
  }

  SectorSpec sp{h1.k_phi, h1.dk_phi, deriv_bound_from_config(h1, h1.dk_phi)};

  // H1 sector certificate at the reported observer dimension
  {
    GainSet g3 = g;
    g3.N = 3;
    StabilityModel md = build_stability_model(ctx.spec, ctx.basis, ctx.lifting, g3, true);
    FeasibilityCertificate cert =
        search_certificate(md, TheoremId::T3_H1_sector, &sp);
    write_json(root / "certificate_h1_n3.json", certificate_to_json(cert, md, &sp));
    MinFeasibleResult scan = min_feasible_N(ctx.spec, ctx.basis, ctx.lifting, g,
                                            TheoremId::T3_H1_sector, &sp, 6);
    rep["h1_sector"] = {{"N_reported", 3},
                        {"feasible_at_reported", cert.feasible},
                        {"min_feasible_N", scan.found ? scan.N : -1},
                        {"theta1_max_eig", cert.margins.theta1_max_eig},
                        {"pass", mark(cert.feasible)},
                        {"note", scan.found && scan.N != 3
                                     ? "scan minimum differs from the reported N=3"
                                     : ""}};
  }

  // L2 sector certificate at the reported observer dimension
  {
    GainSet g16 = g;
    g16.N = 16;
    StabilityModel md =
        build_stability_model(ctx.spec, ctx.basis, ctx.lifting, g16, true);
    FeasibilityCertificate cert =
        search_certificate(md, TheoremId::C4_L2_sector, &sp);
    write_json(root / "certificate_l2_n16.json", certificate_to_json(cert, md, &sp));
    MinFeasibleResult scan = min_feasible_N(ctx.spec, ctx.basis, ctx.lifting, g,
                                            TheoremId::C4_L2_sector, &sp, 20);
    rep["l2_sector"] = {{"N_reported", 16},
                        {"feasible_at_reported", cert.feasible},
                        {"min_feasible_N", scan.found ? scan.N : -1},
                        {"theta1_max_eig", cert.margins.theta1_max_eig},
                        {"pass", mark(cert.feasible)},
                        {"note", scan.found && scan.N != 16
                                     ? "scan minimum differs from the reported N=16"
                                     : ""}};
  }

  // certified decay simulation
  {
    json sim = run_simulate(h1, (root / "sim_certified").string());
    double rate = sim.contains("decay_rate") ? sim["decay_rate"].get<double>() : -1.0;
    bool ok = !sim["diverged"].get<bool>() && rate >= 0.9 * h1.delta;
    rep["certified_decay"] = {{"rate", rate},
                              {"threshold", 0.9 * h1.delta},
                              {"pass", mark(ok)}};
  }

  // divergence demo at the enlarged sector width
  {
    ExperimentConfig dv = ExperimentConfig::from_text(preset_text("repro-sec5-diverge"));
    json sim20 = run_simulate(dv, (root / "sim_diverge_t20").string());
    bool dv20 = sim20["diverged"].get<bool>();
    ExperimentConfig dvlong = dv;
    dvlong.t_final = 400.0;
    json simlong = run_simulate(dvlong, (root / "sim_diverge_long").string());
    bool dvl = simlong["diverged"].get<bool>();
    json entry = {{"diverged_within_t20", dv20},
                  {"diverged_long_horizon", dvl},
                  {"long_horizon_t_final", 400.0},
                  {"pass", mark(dv20)}};
    if (!dv20)
      entry["note"] =
          "the escape rate just past the critical sector width is "
          "lambda_1 shifted by the tail slope (~0.02 here), so the 1000x "
          "threshold is unreachable within t=20; the long-horizon run shows "
          "the genuine divergence";
    rep["divergence_demo"] = entry;
  }

  // sector-size sweep against the reported table
  {
    ExperimentConfig sw = ExperimentConfig::from_text(preset_text("repro-sec5-sweep"));
    json sweep = run_sweep(sw, (root / "sweep").string());
    const double reported[4] = {0.54, 0.24, 0.12, 0.03};
    bool dec = true, band = true;
    std::vector<double> got;
    for (std::size_t i = 0; i < sweep["rows"].size(); ++i) {
      double dk = sweep["rows"][i]["dk_max"].get<double>();
      got.push_back(dk);
      if (i > 0 && !(dk < got[i - 1])) dec = false;
      if (i < 4 && std::abs(dk - reported[i]) > 0.15) band = false;
    }
    rep["sweep"] = {{"dk_max", got},
                    {"reported", {0.54, 0.24, 0.12, 0.03}},
                    {"strictly_decreasing", dec},
                    {"within_band", band},
                    {"pass", mark(dec && band)}};
  }

  // boundedness study of the Lyapunov solution norm over N
  {
    auto norms = lyapunov_norm_study(ctx.spec, ctx.basis, ctx.lifting, g, 2, 20);
    double lo = norms[0], hi = norms[0];
    for (double v : norms) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rep["lyapunov_norm_study"] = {{"min", lo},
                                  {"max", hi},
                                  {"ratio", hi / lo},
                                  {"pass", mark(hi / lo <= 10.0)}};
  }

  rep["pass"] = all_pass;
  write_json(root / "repro_summary.json", rep);
  return rep;
}

int run_command(const std::string& command, const ExperimentConfig& cfg,
                const std::string& out_dir, const std::string& cert_file,
                json& summary) {
  if (command == "eig") {
    summary = run_eig(cfg, out_dir);
    return summary.value("verify_pass", false) ? 0 : 1;
  }
  if (command == "synth") {
    summary = run_synth(cfg, out_dir);
    return 0;
  }
  if (command == "check") {
    summary = run_check(cfg, out_dir, cert_file);
    return summary.value("feasible", false) ? 0 : 1;
  }
  if (command == "simulate") {
    summary = run_simulate(cfg, out_dir);
    return 0;
  }
  if (command == "sweep") {
    summary = run_sweep(cfg, out_dir);
    return 0;
  }
  if (command == "repro") {
    summary = run_repro(out_dir);
    return summary.value("pass", false) ? 0 : 1;
  }
  throw std::invalid_argument("unknown command '" + command + "'");
}

}  // namespace rdstab
