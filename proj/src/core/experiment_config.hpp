#pragma once

#include <string>
#include <vector>

#include "core/certificates.hpp"
#include "core/operator_spec.hpp"

namespace rdstab {

// Flat key/value configuration with one section per module. Unknown sections
// or keys are rejected. Angles accept radians or pi fractions (pi/2, pi/4...).
struct ExperimentConfig {
  int schema_version = 1;

  // [plant]
  double theta1 = M_PI / 2;
  double theta2 = 0.0;
  Coefficient p = Coefficient::constant(1.0);
  Coefficient q_tilde = Coefficient::constant(-3.0);
  int grid_resolution = 2001;
  int n_modes = 0;  // 0: auto

  // [gains]
  double delta = 0.3;
  std::vector<double> poles;   // empty: -(delta+1)
  int N = -1;                  // observer dimension; -1: N0+1
  int N0_override = -1;

  // [sector]
  bool has_sector = true;
  double k_phi = 1.0;
  double dk_phi = 0.5;
  double phi_deriv_bound = 0.0;  // 0: use the instance's measured bound

  // [feasibility]
  TheoremId theorem = TheoremId::T3_H1_sector;
  int n_max = 20;

  // [sim]
  int mesh_nodes = 201;
  double dt = 1e-3;
  double t_final = 10.0;
  int record_stride = 10;
  double z0_scale = 1.0;
  double divergence_rel = 1e3;
  double fit_t0 = 1.0, fit_t1 = 8.0;

  // [sweep]
  std::string sweep_axis;           // "q_tilde" or "n"
  std::vector<double> sweep_values;
  int sweep_N = 15;

  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  // dotted-key override, e.g. set("gains.delta", "0.4")
  void set(const std::string& dotted_key, const std::string& value);

  OperatorSpec make_spec() const;
};

// shipped preset configurations, embedded at build time
const std::string& preset_text(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace rdstab
