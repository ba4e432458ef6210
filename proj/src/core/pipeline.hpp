#pragma once

#include <json.hpp>
#include <string>

#include "core/closed_loop_sim.hpp"
#include "core/experiment_config.hpp"

namespace rdstab {

struct PlantContext {
  OperatorSpec spec;
  SpectralBasis basis;
  LiftingData lifting;
};

// eigensolve + lifting for a config; min_modes raises the computed mode count
PlantContext build_context(const ExperimentConfig& cfg, int min_modes = 0);

GainSet gains_from_config(const ExperimentConfig& cfg, const PlantContext& ctx);

SectorNonlinearity phi_from_config(const ExperimentConfig& cfg);

// derivative bound used by Theta assembly: the configured constant when given,
// otherwise the measured bound of the phi instance at that sector width
double deriv_bound_from_config(const ExperimentConfig& cfg, double dk);

nlohmann::json run_eig(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json run_synth(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json run_check(const ExperimentConfig& cfg, const std::string& out_dir,
                         const std::string& cert_file = "");
nlohmann::json run_simulate(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json run_sweep(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json run_repro(const std::string& out_dir);

// dispatch; returns the process exit code (repro: nonzero iff a check failed)
int run_command(const std::string& command, const ExperimentConfig& cfg,
                const std::string& out_dir, const std::string& cert_file,
                nlohmann::json& summary);

}  // namespace rdstab
