#include "core/spectral_model.hpp"

#include <cmath>
#include <stdexcept>

namespace rdstab {

namespace {

double richardson3(double v1, double v2, double v3) {
  double a = (4.0 * v2 - v1) / 3.0;
  double b = (4.0 * v3 - v2) / 3.0;
  return (16.0 * b - a) / 15.0;
}

// moments int_0^1 x^j cos(kx) dx and int_0^1 x^j sin(kx) dx, j <= 2
void trig_moments(double k, double (&mc)[3], double (&ms)[3]) {
  if (k == 0.0) {
    for (int j = 0; j <= 2; ++j) mc[j] = 1.0 / (j + 1), ms[j] = 0.0;
    return;
  }
  double s = std::sin(k), c = std::cos(k);
  mc[0] = s / k;
  ms[0] = (1.0 - c) / k;
  for (int j = 1; j <= 2; ++j) {
    mc[j] = s / k - (j / k) * ms[j - 1];
    ms[j] = -c / k + (j / k) * mc[j - 1];
  }
}

}  // namespace

LiftingData lifting_coefficients(const OperatorSpec& spec, const SpectralBasis& basis) {
  LiftingData lf;
  lf.denom = std::cos(spec.theta2) + 2.0 * std::sin(spec.theta2);
  if (std::abs(lf.denom) < 1e-12)
    throw std::runtime_error("degenerate lifting denominator");
  const int n = basis.n_modes;

  auto a_of = [&](double x) {
    return (2.0 * spec.p(x) + 2.0 * x * spec.p.deriv(x) - x * x * spec.q_tilde(x)) /
           lf.denom;
  };
  auto b_of = [&](double x) { return -x * x / lf.denom; };

  const int m = static_cast<int>(basis.grid.size());
  lf.a_samples.resize(m);
  lf.b_samples.resize(m);
  for (int i = 0; i < m; ++i) {
    lf.a_samples[i] = a_of(basis.grid[i]);
    lf.b_samples[i] = b_of(basis.grid[i]);
  }

  lf.a_n.resize(n);
  lf.b_n.resize(n);
  lf.beta_n.resize(n);

  if (basis.closed_form) {
    // analytic projections: constant p, q_tilde; phi = A cos kx + B sin kx
    double pc = spec.p.constant_value();
    double qt = spec.q_tilde(0.0);
    double c0 = 2.0 * pc / lf.denom, c2 = -qt / lf.denom;
    for (int j = 0; j < n; ++j) {
      double k = std::sqrt(std::max(0.0, (basis.lambdas[j] - spec.q.constant_value()) / pc));
      double A = basis.phi0[j];
      double B = (k == 0.0) ? 0.0
                            : (basis.dphi1[j] + A * k * std::sin(k)) / (k * std::cos(k));
      if (k > 0.0 && std::abs(std::cos(k)) < 1e-8) {
        // recover B from phi(1) instead when cos(k) ~ 0
        B = (basis.phi1[j] - A * std::cos(k)) / std::sin(k);
      }
      double mc[3], ms[3];
      trig_moments(k, mc, ms);
      double i0 = A * mc[0] + B * ms[0];
      double i2 = A * mc[2] + B * ms[2];
      lf.a_n[j] = c0 * i0 + c2 * i2;
      lf.b_n[j] = -i2 / lf.denom;
    }
    lf.a_norm_sq = c0 * c0 + 2.0 * c0 * c2 / 3.0 + c2 * c2 / 5.0;
    lf.b_norm_sq = 1.0 / (5.0 * lf.denom * lf.denom);
  } else {
    if (basis.levels.size() != 3)
      throw std::runtime_error("numeric basis lacks refinement levels");
    double an_l[3], bn_l[3], anorm_l[3], bnorm_l[3];
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < 3; ++l) {
        const auto& lev = basis.levels[l];
        const int ml = static_cast<int>(lev.grid.size());
        double sa = 0, sb = 0;
        for (int i = 0; i < ml; ++i) {
          double w = lev.weights[i] * lev.samples(i, j);
          sa += w * a_of(lev.grid[i]);
          sb += w * b_of(lev.grid[i]);
        }
        an_l[l] = sa;
        bn_l[l] = sb;
      }
      lf.a_n[j] = richardson3(an_l[0], an_l[1], an_l[2]);
      lf.b_n[j] = richardson3(bn_l[0], bn_l[1], bn_l[2]);
    }
    for (int l = 0; l < 3; ++l) {
      const auto& lev = basis.levels[l];
      const int ml = static_cast<int>(lev.grid.size());
      double sa = 0, sb = 0;
      for (int i = 0; i < ml; ++i) {
        double av = a_of(lev.grid[i]), bv = b_of(lev.grid[i]);
        sa += lev.weights[i] * av * av;
        sb += lev.weights[i] * bv * bv;
      }
      anorm_l[l] = sa;
      bnorm_l[l] = sb;
    }
    lf.a_norm_sq = richardson3(anorm_l[0], anorm_l[1], anorm_l[2]);
    lf.b_norm_sq = richardson3(bnorm_l[0], bnorm_l[1], bnorm_l[2]);
  }

  lf.identity_residual.resize(n);
  for (int j = 0; j < n; ++j) {
    lf.beta_n[j] = spec.p(1.0) * (-std::cos(spec.theta2) * basis.dphi1[j] +
                                  std::sin(spec.theta2) * basis.phi1[j]);
    double lhs = lf.beta_n[j];
    double rhs = lf.a_n[j] + (-basis.lambdas[j] + spec.q_c) * lf.b_n[j];
    lf.identity_residual[j] = std::abs(lhs - rhs) / (1.0 + basis.lambdas[j]);
    double tol = (j < 60) ? 1e-5 : 1e-3;
    if (lf.identity_residual[j] > tol)
      throw std::runtime_error("beta_n dual-formula identity violated at mode " +
                               std::to_string(j + 1) + " (residual " +
                               std::to_string(lf.identity_residual[j]) + ")");
  }
  return lf;
}

std::pair<double, double> tail_norms(const LiftingData& lifting, int N) {
  if (N < 0 || N > lifting.a_n.size())
    throw std::invalid_argument("tail_norms: N out of range");
  double ra = lifting.a_norm_sq - lifting.a_n.head(N).squaredNorm();
  double rb = lifting.b_norm_sq - lifting.b_n.head(N).squaredNorm();
  double tol_a = 1e-8 * (1.0 + lifting.a_norm_sq);
  double tol_b = 1e-8 * (1.0 + lifting.b_norm_sq);
  if (ra < -tol_a || rb < -tol_b)
    throw std::runtime_error("negative Parseval complement (quadrature inconsistency)");
  return {std::max(0.0, ra), std::max(0.0, rb)};
}

double tail_mode_sum(const SpectralBasis& basis, int N, double exponent,
                     const OperatorSpec& spec) {
  if (N < 1) throw std::invalid_argument("tail_mode_sum: N >= 1 required");
  if (exponent != 1.0 && exponent != 0.75)
    throw std::invalid_argument("tail_mode_sum: exponent must be 1 or 3/4");
  const auto& lam = basis.tail_lambdas;
  const auto& ph0 = basis.tail_phi0;
  const int nt = static_cast<int>(lam.size());
  if (nt < N + 200)
    throw std::runtime_error("tail table too small (need >= N+200 modes)");
  double partial = 0.0;
  for (int j = N; j < nt; ++j) partial += ph0[j] * ph0[j] / std::pow(lam[j], exponent);
  double c_sup = 1.5 * ph0.cwiseAbs().maxCoeff();
  const double J = static_cast<double>(nt);  // remainder covers modes n > nt
  double base = M_PI * M_PI * spec.p_lo;
  double remainder;
  if (exponent == 1.0)
    remainder = c_sup * c_sup / (base * (J - 1.0));
  else
    remainder = c_sup * c_sup / std::pow(base, 0.75) * 2.0 / std::sqrt(J - 1.0);
  if (remainder > 0.1 * partial)
    throw std::runtime_error("tail remainder bound exceeds 10% of partial sum; "
                             "n_tail too small");
  return partial + remainder;
}

StabilityModel build_stability_model(const OperatorSpec& spec, const SpectralBasis& basis,
                                     const LiftingData& lifting, const GainSet& gains,
                                     bool includes_psi) {
  const int N0 = gains.N0, N = gains.N;
  if (N < N0 + 1) throw std::invalid_argument("model requires N >= N0 + 1");
  if (basis.n_modes < N + 1) throw std::invalid_argument("basis must cover N+1 modes");
  if (gains.K.size() != N0 || gains.L.size() != N0)
    throw std::invalid_argument("gain dimensions inconsistent with N0");

  StabilityModel md;
  md.N0 = N0;
  md.N = N;
  md.includes_psi = includes_psi;
  md.k_phi = gains.k_phi;
  md.delta = gains.delta;
  md.q_c = spec.q_c;
  md.K = gains.K;
  md.L = gains.L;
  md.lambda_Np1 = basis.lambdas[N];
  md.a_norm_sq = lifting.a_norm_sq;

  md.A0_diag = (-basis.lambdas.head(N0)).array() + spec.q_c;
  md.A1_diag = (-basis.lambdas.segment(N0, N - N0)).array() + spec.q_c;
  md.B0 = lifting.beta_n.head(N0);
  md.B1t.resize(N - N0);
  md.C1t.resize(N - N0);
  for (int i = 0; i < N - N0; ++i) {
    md.B1t[i] = lifting.beta_n[N0 + i] / basis.lambdas[N0 + i];
    md.C1t[i] = basis.phi0[N0 + i] / std::sqrt(basis.lambdas[N0 + i]);
  }
  md.C0 = basis.phi0.head(N0).transpose();

  // Hurwitz margin checks on the reduced pair
  Eigen::MatrixXd Afb = Eigen::MatrixXd(md.A0_diag.asDiagonal()) +
                        md.k_phi * md.B0 * gains.K;
  Eigen::MatrixXd Aob = Eigen::MatrixXd(md.A0_diag.asDiagonal()) -
                        gains.L * md.C0;
  auto abscissa = [](const Eigen::MatrixXd& M) {
    return M.eigenvalues().real().maxCoeff();
  };
  double afb = abscissa(Afb), aob = abscissa(Aob);
  if (!(afb < -gains.delta))
    throw std::runtime_error("feedback block violates the decay margin: abscissa " +
                             std::to_string(afb) + " >= -delta");
  if (!(aob < -gains.delta))
    throw std::runtime_error("observer block violates the decay margin: abscissa " +
                             std::to_string(aob) + " >= -delta");

  const int n2 = 2 * N;
  const int iZ = 0, iE = N0, iZt = 2 * N0, iEt = N0 + N;
  md.F = Eigen::MatrixXd::Zero(n2, n2);
  md.F.block(iZ, iZ, N0, N0) = Afb;
  md.F.block(iZ, iE, N0, N0) = gains.L * md.C0;
  md.F.block(iZ, iEt, N0, N - N0) = gains.L * md.C1t;
  md.F.block(iE, iE, N0, N0) = Aob;
  md.F.block(iE, iEt, N0, N - N0) = -gains.L * md.C1t;
  md.F.block(iZt, iZ, N - N0, N0) = md.k_phi * md.B1t * gains.K;
  md.F.block(iZt, iZt, N - N0, N - N0) = md.A1_diag.asDiagonal();
  md.F.block(iEt, iEt, N - N0, N - N0) = md.A1_diag.asDiagonal();

  md.Lcal = Eigen::VectorXd::Zero(n2);
  md.Lcal.segment(iZ, N0) = gains.L;
  md.Lcal.segment(iE, N0) = -gains.L;

  md.Ktilde = Eigen::RowVectorXd::Zero(n2);
  md.Ktilde.head(N0) = gains.K;

  if (includes_psi) {
    md.Lpsi = Eigen::VectorXd::Zero(n2);
    md.Lpsi.segment(iZ, N0) = md.B0;
    md.Lpsi.segment(iZt, N - N0) = md.B1t;
  }

  const double KL = (gains.K * gains.L)(0, 0);
  md.Erow = Eigen::RowVectorXd::Zero(n2 + (includes_psi ? 2 : 1));
  md.Erow.segment(iZ, N0) = gains.K * Afb;
  md.Erow.segment(iE, N0) = KL * md.C0;
  md.Erow.segment(iEt, N - N0) = KL * md.C1t;
  md.Erow[n2] = KL;
  if (includes_psi) md.Erow[n2 + 1] = (gains.K * md.B0)(0, 0);

  auto [ra, rb] = tail_norms(lifting, N);
  md.r_a = ra;
  md.r_b = rb;
  md.m_tail = tail_mode_sum(basis, N, 1.0, spec);
  try {
    md.m_tail34 = tail_mode_sum(basis, N, 0.75, spec);
  } catch (const std::exception&) {
    md.m_tail34 = std::numeric_limits<double>::quiet_NaN();
  }
  return md;
}

}  // namespace rdstab
