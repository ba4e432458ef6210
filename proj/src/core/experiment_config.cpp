#include "core/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "presets_data.hpp"

namespace rdstab {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_angle(const std::string& v) {
  if (v == "pi") return M_PI;
  if (v == "pi/2") return M_PI / 2;
  if (v == "pi/3") return M_PI / 3;
  if (v == "pi/4") return M_PI / 4;
  if (v == "pi/6") return M_PI / 6;
  return std::stod(v);
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    if (key == "schema_version") {
      schema_version = std::stoi(v);
      if (schema_version != 1) throw std::invalid_argument("unsupported schema_version");
    } else if (key == "plant.theta1") theta1 = parse_angle(v);
    else if (key == "plant.theta2") theta2 = parse_angle(v);
    else if (key == "plant.p") p = Coefficient::parse(v);
    else if (key == "plant.q_tilde") q_tilde = Coefficient::parse(v);
    else if (key == "plant.grid_resolution") grid_resolution = std::stoi(v);
    else if (key == "plant.n_modes") n_modes = std::stoi(v);
    else if (key == "gains.delta") delta = std::stod(v);
    else if (key == "gains.poles") poles = parse_list(v);
    else if (key == "gains.n") N = std::stoi(v);
    else if (key == "gains.n0") N0_override = std::stoi(v);
    else if (key == "sector.enabled") has_sector = (v == "true" || v == "1");
    else if (key == "sector.k_phi") k_phi = std::stod(v);
    else if (key == "sector.dk_phi") dk_phi = std::stod(v);
    else if (key == "sector.phi_deriv_bound") phi_deriv_bound = std::stod(v);
    else if (key == "feasibility.theorem") theorem = theorem_from_name(v);
    else if (key == "feasibility.n_max") n_max = std::stoi(v);
    else if (key == "sim.mesh_nodes") mesh_nodes = std::stoi(v);
    else if (key == "sim.dt") dt = std::stod(v);
    else if (key == "sim.t_final") t_final = std::stod(v);
    else if (key == "sim.record_stride") record_stride = std::stoi(v);
    else if (key == "sim.z0_scale") z0_scale = std::stod(v);
    else if (key == "sim.divergence_rel") divergence_rel = std::stod(v);
    else if (key == "sim.fit_t0") fit_t0 = std::stod(v);
    else if (key == "sim.fit_t1") fit_t1 = std::stod(v);
    else if (key == "sweep.axis") sweep_axis = v;
    else if (key == "sweep.values") sweep_values = parse_list(v);
    else if (key == "sweep.n") sweep_N = std::stoi(v);
    else throw std::invalid_argument("unknown configuration key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument("bad value for '" + key + "': " + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      static const std::vector<std::string> known = {"plant", "gains", "sector",
                                                     "feasibility", "sim", "sweep"};
      bool ok = false;
      for (const auto& k : known) ok = ok || k == section;
      if (!ok)
        throw std::invalid_argument("unknown config section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    c.set(section.empty() ? key : section + "." + key, val);
  }
  // range checks shared with OperatorSpec::validate
  if (!(c.theta1 > 0 && c.theta1 <= M_PI / 2 + 1e-15))
    throw std::invalid_argument("plant.theta1 outside (0, pi/2]");
  if (!(c.theta2 >= 0 && c.theta2 <= M_PI / 2 + 1e-15))
    throw std::invalid_argument("plant.theta2 outside [0, pi/2]");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

OperatorSpec ExperimentConfig::make_spec() const {
  return make_operator_spec(theta1, theta2, p, q_tilde, grid_resolution);
}

const std::string& preset_text(const std::string& name) {
  for (const auto& [n, t] : kPresets)
    if (name == n) return t;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [n, t] : kPresets) out.push_back(n);
  return out;
}

}  // namespace rdstab
