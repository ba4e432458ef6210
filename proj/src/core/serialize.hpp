#pragma once

#include <json.hpp>

#include "core/certificates.hpp"
#include "core/gain_synthesis.hpp"

namespace rdstab {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  if (rows == 0) return {};
  Eigen::MatrixXd M(rows, j[0].size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < j[i].size(); ++k) M(i, k) = j[i][k].get<double>();
  return M;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

inline nlohmann::json gains_to_json(const GainSet& g, double q_c) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["N0"] = g.N0;
  j["N"] = g.N;
  j["K"] = vector_to_json(g.K.transpose());
  j["L"] = vector_to_json(g.L);
  j["delta"] = g.delta;
  j["k_phi"] = g.k_phi;
  j["q_c"] = q_c;
  j["target_poles"] = g.target_poles;
  return j;
}

inline GainSet gains_from_json(const nlohmann::json& j) {
  GainSet g;
  g.N0 = j.at("N0");
  g.N = j.at("N");
  g.K = vector_from_json(j.at("K")).transpose();
  g.L = vector_from_json(j.at("L"));
  g.delta = j.at("delta");
  g.k_phi = j.at("k_phi");
  g.target_poles = j.at("target_poles").get<std::vector<double>>();
  return g;
}

inline nlohmann::json model_to_json(const StabilityModel& m) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["N0"] = m.N0;
  j["N"] = m.N;
  j["includes_psi"] = m.includes_psi;
  j["k_phi"] = m.k_phi;
  j["delta"] = m.delta;
  j["q_c"] = m.q_c;
  j["F"] = matrix_to_json(m.F);
  j["Lcal"] = vector_to_json(m.Lcal);
  if (m.includes_psi) j["Lpsi"] = vector_to_json(m.Lpsi);
  j["Ktilde"] = vector_to_json(m.Ktilde.transpose());
  j["Erow"] = vector_to_json(m.Erow.transpose());
  j["r_a"] = m.r_a;
  j["r_b"] = m.r_b;
  j["m_tail"] = m.m_tail;
  if (std::isfinite(m.m_tail34)) j["m_tail34"] = m.m_tail34;
  j["lambda_Np1"] = m.lambda_Np1;
  j["a_norm_sq"] = m.a_norm_sq;
  return j;
}

inline StabilityModel model_from_json(const nlohmann::json& j) {
  StabilityModel m;
  m.N0 = j.at("N0");
  m.N = j.at("N");
  m.includes_psi = j.at("includes_psi");
  m.k_phi = j.at("k_phi");
  m.delta = j.at("delta");
  m.q_c = j.at("q_c");
  m.F = matrix_from_json(j.at("F"));
  m.Lcal = vector_from_json(j.at("Lcal"));
  if (m.includes_psi) m.Lpsi = vector_from_json(j.at("Lpsi"));
  m.Ktilde = vector_from_json(j.at("Ktilde")).transpose();
  m.Erow = vector_from_json(j.at("Erow")).transpose();
  m.r_a = j.at("r_a");
  m.r_b = j.at("r_b");
  m.m_tail = j.at("m_tail");
  m.m_tail34 = j.contains("m_tail34") ? j.at("m_tail34").get<double>()
                                      : std::numeric_limits<double>::quiet_NaN();
  m.lambda_Np1 = j.at("lambda_Np1");
  m.a_norm_sq = j.at("a_norm_sq");
  return m;
}

inline nlohmann::json certificate_to_json(const FeasibilityCertificate& c,
                                          const StabilityModel& model,
                                          const SectorSpec* sector) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["theorem"] = theorem_name(c.theorem);
  j["feasible"] = c.feasible;
  j["alpha"] = c.scalars.alpha;
  j["beta"] = c.scalars.beta;
  j["gamma"] = c.scalars.gamma;
  if (theorem_is_sector(c.theorem)) j["tau"] = c.scalars.tau;
  j["P"] = matrix_to_json(c.P);
  j["margins"] = {{"theta1_max_eig", c.margins.theta1_max_eig},
                  {"theta2", c.margins.theta2},
                  {"theta3", c.margins.theta3},
                  {"p_min_eig", c.margins.p_min_eig}};
  j["note"] = c.note;
  j["model"] = model_to_json(model);
  if (sector)
    j["sector"] = {{"k_phi", sector->k_phi},
                   {"dk_phi", sector->dk_phi},
                   {"phi_deriv_bound", sector->phi_deriv_bound}};
  return j;
}

}  // namespace rdstab

#include "core/sector_nonlinearity.hpp"

namespace rdstab {

inline nlohmann::json phi_to_json(const SectorNonlinearity& phi) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["k_phi"] = phi.k_phi();
  j["dk_phi"] = phi.dk_phi();
  j["linear"] = phi.is_linear();
  if (!phi.is_linear()) {
    j["tail_start"] = phi.tail_start();
    nlohmann::json knots = nlohmann::json::array();
    for (const auto& k : phi.knots()) knots.push_back({k.x, k.y, k.m});
    j["knots"] = knots;
    j["measured_deriv_bound"] = phi.measured_deriv_bound();
  }
  return j;
}

struct LoadedCertificate {
  FeasibilityCertificate cert;
  StabilityModel model;
  bool has_sector = false;
  SectorSpec sector;
};

inline LoadedCertificate certificate_from_json(const nlohmann::json& j) {
  LoadedCertificate out;
  out.cert.theorem = theorem_from_name(j.at("theorem"));
  out.cert.scalars.alpha = j.at("alpha");
  out.cert.scalars.beta = j.at("beta");
  out.cert.scalars.gamma = j.at("gamma");
  out.cert.scalars.tau = j.contains("tau") ? j.at("tau").get<double>() : 0.0;
  out.cert.P = matrix_from_json(j.at("P"));
  out.model = model_from_json(j.at("model"));
  if (j.contains("sector")) {
    out.has_sector = true;
    out.sector.k_phi = j["sector"].at("k_phi");
    out.sector.dk_phi = j["sector"].at("dk_phi");
    out.sector.phi_deriv_bound = j["sector"].at("phi_deriv_bound");
  }
  return out;
}

}  // namespace rdstab
