// Command-line front end; links only the C API.
#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "rdstab.h"

namespace {

struct SessionDeleter {
  void operator()(rdstab_session* s) const { rdstab_session_free(s); }
};
using Session = std::unique_ptr<rdstab_session, SessionDeleter>;

int fail(const rdstab_session* s, const char* what) {
  std::fprintf(stderr, "rdstab: %s: %s\n", what, rdstab_last_error(s));
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional boundary stabilization toolkit for 1-D "
               "reaction-diffusion plants"};
  app.require_subcommand(1);

  std::string config, preset, out = "out", cert;
  std::string theorem;
  int n = -1, nmax = -1;
  double delta = -1, dkphi = -1;
  std::vector<double> poles;

  app.add_option("--config", config, "configuration file");
  app.add_option("--preset", preset,
                 "shipped preset (repro-sec5-h1, repro-sec5-l2, repro-sec5-sweep, "
                 "repro-sec5-diverge)");
  app.add_option("--out", out, "output directory");
  app.add_option("--theorem", theorem, "t1 | t2 | t3 | c4");
  app.add_option("--n", n, "observer dimension N");
  app.add_option("--nmax", nmax, "scan limit for feasibility sweeps");
  app.add_option("--poles", poles, "closed-loop pole locations");
  app.add_option("--delta", delta, "decay target");
  app.add_option("--dkphi", dkphi, "sector half-width");
  app.add_option("--cert", cert, "certificate file (check)");

  auto* c_eig = app.add_subcommand("eig", "solve the plant eigenstructure");
  auto* c_synth = app.add_subcommand("synth", "synthesize observer/feedback gains");
  auto* c_check = app.add_subcommand("check", "search or verify a feasibility certificate");
  auto* c_sim = app.add_subcommand("simulate", "closed-loop simulation");
  auto* c_sweep = app.add_subcommand("sweep", "parameter sweep");
  auto* c_repro = app.add_subcommand("repro", "reproduce the case-study bundle");
  for (auto* sc : {c_eig, c_synth, c_check, c_sim, c_sweep, c_repro})
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  Session s(rdstab_session_new());
  if (!s) {
    std::fprintf(stderr, "rdstab: out of memory\n");
    return 2;
  }

  const bool is_repro = c_repro->parsed();
  if (!preset.empty()) {
    if (rdstab_load_preset(s.get(), preset.c_str()) != RDSTAB_OK)
      return fail(s.get(), "preset");
  } else if (!config.empty()) {
    if (rdstab_load_config_file(s.get(), config.c_str()) != RDSTAB_OK)
      return fail(s.get(), "config");
  } else if (!is_repro) {
    // defaults: the case-study plant
    if (rdstab_load_preset(s.get(), "repro-sec5-h1") != RDSTAB_OK)
      return fail(s.get(), "preset");
  }

  auto set_if = [&](const char* key, const std::string& v) -> bool {
    if (v.empty()) return true;
    if (rdstab_set(s.get(), key, v.c_str()) != RDSTAB_OK) {
      fail(s.get(), key);
      return false;
    }
    return true;
  };
  if (!is_repro) {
    if (!set_if("feasibility.theorem", theorem)) return 2;
    if (n > 0 && !set_if("gains.n", std::to_string(n))) return 2;
    if (nmax > 0 && !set_if("feasibility.n_max", std::to_string(nmax))) return 2;
    if (delta > 0 && !set_if("gains.delta", std::to_string(delta))) return 2;
    if (dkphi > 0 && !set_if("sector.dk_phi", std::to_string(dkphi))) return 2;
    if (!poles.empty()) {
      std::string p;
      for (double v : poles) p += (p.empty() ? "" : ",") + std::to_string(v);
      if (!set_if("gains.poles", p)) return 2;
    }
  }

  const char* command = c_eig->parsed()     ? "eig"
                        : c_synth->parsed() ? "synth"
                        : c_check->parsed() ? "check"
                        : c_sim->parsed()   ? "simulate"
                        : c_sweep->parsed() ? "sweep"
                                            : "repro";
  if (rdstab_run(s.get(), command, out.c_str(), cert.empty() ? nullptr : cert.c_str()) !=
      RDSTAB_OK)
    return fail(s.get(), command);
  std::printf("%s\n", rdstab_summary_json(s.get()));
  return rdstab_exit_code(s.get());
}
