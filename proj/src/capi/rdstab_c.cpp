#include "rdstab.h"

#include <exception>
#include <string>

#include "core/pipeline.hpp"
#include "core/serialize.hpp"

struct rdstab_session {
  rdstab::ExperimentConfig cfg;
  bool has_cfg = false;
  std::string summary;
  std::string error;
  int exit_code = 0;
};

namespace {

rdstab_status guard(rdstab_session* s, const std::function<void()>& f) {
  if (!s) return RDSTAB_ERR_ARGUMENT;
  s->error.clear();
  try {
    f();
    return RDSTAB_OK;
  } catch (const std::invalid_argument& e) {
    s->error = e.what();
    return RDSTAB_ERR_ARGUMENT;
  } catch (const std::ios_base::failure& e) {
    s->error = e.what();
    return RDSTAB_ERR_IO;
  } catch (const std::runtime_error& e) {
    s->error = e.what();
    return RDSTAB_ERR_NUMERIC;
  } catch (const std::exception& e) {
    s->error = e.what();
    return RDSTAB_ERR_INTERNAL;
  }
}

rdstab_status need_cfg(rdstab_session* s) {
  if (!s) return RDSTAB_ERR_ARGUMENT;
  if (!s->has_cfg) {
    s->error = "no configuration loaded";
    return RDSTAB_ERR_ARGUMENT;
  }
  return RDSTAB_OK;
}

}  // namespace

extern "C" {

unsigned rdstab_abi_version(void) { return 1u; }

rdstab_session* rdstab_session_new(void) { return new (std::nothrow) rdstab_session; }

void rdstab_session_free(rdstab_session* s) { delete s; }

rdstab_status rdstab_load_config_file(rdstab_session* s, const char* path) {
  if (!path) return RDSTAB_ERR_ARGUMENT;
  return guard(s, [&] {
    s->cfg = rdstab::ExperimentConfig::from_file(path);
    s->has_cfg = true;
  });
}

rdstab_status rdstab_load_config_text(rdstab_session* s, const char* text) {
  if (!text) return RDSTAB_ERR_ARGUMENT;
  return guard(s, [&] {
    s->cfg = rdstab::ExperimentConfig::from_text(text);
    s->has_cfg = true;
  });
}

rdstab_status rdstab_load_preset(rdstab_session* s, const char* name) {
  if (!name) return RDSTAB_ERR_ARGUMENT;
  return guard(s, [&] {
    s->cfg = rdstab::ExperimentConfig::from_text(rdstab::preset_text(name));
    s->has_cfg = true;
  });
}

rdstab_status rdstab_set(rdstab_session* s, const char* key, const char* value) {
  if (!key || !value) return RDSTAB_ERR_ARGUMENT;
  if (auto st = need_cfg(s); st != RDSTAB_OK) return st;
  return guard(s, [&] { s->cfg.set(key, value); });
}

rdstab_status rdstab_run(rdstab_session* s, const char* command, const char* out_dir,
                         const char* cert_file) {
  if (!command || !out_dir) return RDSTAB_ERR_ARGUMENT;
  if (std::string(command) != "repro")
    if (auto st = need_cfg(s); st != RDSTAB_OK) return st;
  return guard(s, [&] {
    nlohmann::json summary;
    s->exit_code = rdstab::run_command(command, s->cfg, out_dir,
                                       cert_file ? cert_file : "", summary);
    s->summary = summary.dump(2);
  });
}

const char* rdstab_summary_json(const rdstab_session* s) {
  return s ? s->summary.c_str() : "";
}

const char* rdstab_last_error(const rdstab_session* s) {
  return s ? s->error.c_str() : "null session";
}

int rdstab_exit_code(const rdstab_session* s) { return s ? s->exit_code : 2; }

rdstab_status rdstab_eigenvalues(rdstab_session* s, int n, double* out) {
  if (!out || n < 1) return RDSTAB_ERR_ARGUMENT;
  if (auto st = need_cfg(s); st != RDSTAB_OK) return st;
  return guard(s, [&] {
    rdstab::PlantContext ctx = rdstab::build_context(s->cfg, n);
    for (int i = 0; i < n; ++i) out[i] = ctx.basis.lambdas[i];
  });
}

rdstab_status rdstab_gains(rdstab_session* s, double* K, double* L, int max_n,
                           int* n0_out) {
  if (!K || !L || !n0_out || max_n < 1) return RDSTAB_ERR_ARGUMENT;
  if (auto st = need_cfg(s); st != RDSTAB_OK) return st;
  return guard(s, [&] {
    rdstab::PlantContext ctx = rdstab::build_context(s->cfg, 2);
    rdstab::GainSet g = rdstab::gains_from_config(s->cfg, ctx);
    if (g.N0 > max_n) throw std::invalid_argument("gain buffers too small");
    for (int i = 0; i < g.N0; ++i) {
      K[i] = g.K(0, i);
      L[i] = g.L(i);
    }
    *n0_out = g.N0;
  });
}

rdstab_status rdstab_certificate(rdstab_session* s, const char* theorem, int N,
                                 int* feasible_out, double* margin_out) {
  if (!theorem || !feasible_out || !margin_out || N < 2) return RDSTAB_ERR_ARGUMENT;
  if (auto st = need_cfg(s); st != RDSTAB_OK) return st;
  return guard(s, [&] {
    rdstab::TheoremId t = rdstab::theorem_from_name(theorem);
    rdstab::PlantContext ctx = rdstab::build_context(s->cfg, N + 1);
    rdstab::GainSet g = rdstab::gains_from_config(s->cfg, ctx);
    g.N = N;
    bool sec = rdstab::theorem_is_sector(t);
    rdstab::StabilityModel md =
        rdstab::build_stability_model(ctx.spec, ctx.basis, ctx.lifting, g, sec);
    rdstab::SectorSpec sp{s->cfg.k_phi, s->cfg.dk_phi,
                          rdstab::deriv_bound_from_config(s->cfg, s->cfg.dk_phi)};
    rdstab::FeasibilityCertificate c =
        rdstab::search_certificate(md, t, sec ? &sp : nullptr);
    *feasible_out = c.feasible ? 1 : 0;
    *margin_out = c.margins.theta1_max_eig;
  });
}

}  // extern "C"
