#include "core/sturm_liouville.hpp"

#include <lapacke.h>

#include <cmath>
#include <stdexcept>

namespace rdstab {

namespace {

constexpr double kPi = M_PI;

bool near(double a, double b) { return std::abs(a - b) < 1e-14; }

// symmetric tridiagonal form of the discrete operator plus weights
struct SymTri {
  Eigen::VectorXd d, e, w, grid;
  int i0, i1;
};

SymTri sym_form(const DiscreteOperator& op) {
  int n = op.active_size();
  SymTri s;
  s.d.resize(n);
  s.e.resize(std::max(0, n - 1));
  s.w = op.weights;
  s.grid = op.grid;
  s.i0 = op.i0;
  s.i1 = op.i1;
  for (int i = 0; i < n; ++i) s.d[i] = op.diag[i];
  for (int i = 0; i + 1 < n; ++i)
    s.e[i] = op.sup[i] * std::sqrt(op.weights[i] / op.weights[i + 1]);
  return s;
}

struct EigResult {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd vectors;  // full-grid embedded, weight-normalized, phi(0) > 0
  Eigen::VectorXd phi0, phi1, dphi1;
};

EigResult eig_level(const OperatorSpec& spec, int m, int nev) {
  DiscreteOperator op = discretize(spec, m, /*use_q_tilde=*/false);
  SymTri s = sym_form(op);
  int n = static_cast<int>(s.d.size());
  if (nev > n) throw std::runtime_error("requested more modes than grid nodes");
  Eigen::VectorXd d = s.d, e(std::max(1, n - 1));
  for (int i = 0; i + 1 < n; ++i) e[i] = s.e[i];
  // bisection + inverse iteration: bisection refines each eigenvalue to
  // near-relative accuracy, which the small eigenvalues need
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, nev);
  std::vector<lapack_int> iblock(n), isplit(n), ifail(nev);
  lapack_int found = 0, nsplit = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int info = LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, 1, nev, abstol, d.data(),
                                   e.data(), &found, &nsplit, w.data(), iblock.data(),
                                   isplit.data());
  if (info != 0 || found != nev)
    throw std::runtime_error("tridiagonal eigenvalue bisection failed (info=" +
                             std::to_string(info) + ")");
  info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), nev, w.data(),
                        iblock.data(), isplit.data(), z.data(), n, ifail.data());
  if (info != 0)
    throw std::runtime_error("tridiagonal inverse iteration failed (info=" +
                             std::to_string(info) + ")");

  EigResult r;
  r.lambdas = w.head(nev);
  r.vectors = Eigen::MatrixXd::Zero(m, nev);
  r.phi0.resize(nev);
  r.phi1.resize(nev);
  r.dphi1.resize(nev);
  double h = 1.0 / (m - 1);
  for (int j = 0; j < nev; ++j) {
    // back-transform to the weighted problem and normalize in trapezoid norm
    Eigen::VectorXd f = z.col(j).array() / s.w.array().sqrt();
    double nrm = std::sqrt((s.w.array() * f.array().square()).sum());
    f /= nrm;
    // sign: phi(0) > 0 (phi_n(0) never vanishes for theta1 in (0, pi/2])
    double lead = f[0];
    if (std::abs(lead) < 1e-12 * f.cwiseAbs().maxCoeff()) {
      int imax;
      f.cwiseAbs().maxCoeff(&imax);
      lead = f[imax];
    }
    if (lead < 0) f = -f;
    r.vectors.block(s.i0, j, s.i1 - s.i0 + 1, 1) = f;
    const auto& v = r.vectors.col(j);
    r.phi0[j] = v[0];
    r.phi1[j] = v[m - 1];
    r.dphi1[j] = (25.0 / 12.0 * v[m - 1] - 4.0 * v[m - 2] + 3.0 * v[m - 3] -
                  4.0 / 3.0 * v[m - 4] + 0.25 * v[m - 5]) / h;
  }
  return r;
}

double richardson3(double v1, double v2, double v3) {
  double a = (4.0 * v2 - v1) / 3.0;
  double b = (4.0 * v3 - v2) / 3.0;
  return (16.0 * b - a) / 15.0;
}

void check_bracket(const Eigen::VectorXd& lams, const OperatorSpec& spec) {
  for (int n = 1; n <= lams.size(); ++n) {
    double lo = kPi * kPi * (n - 1) * (n - 1) * spec.p_lo;
    double hi = kPi * kPi * double(n) * n * spec.p_hi + spec.q_hi;
    double slack = 1e-9 * (1.0 + hi);
    if (!(lams[n - 1] >= lo - slack && lams[n - 1] <= hi + slack))
      throw std::runtime_error("eigenvalue bracket violated at mode " + std::to_string(n) +
                               " (discretization too coarse?)");
  }
  for (int n = 1; n < lams.size(); ++n)
    if (!(lams[n] > lams[n - 1]))
      throw std::runtime_error("eigenvalues not strictly increasing");
}

// characteristic function for constant coefficients; phi = A cos(kx) + B sin(kx),
// A = sin(theta1) k, B = cos(theta1)
double char_fn(double k, double t1, double t2) {
  double A = std::sin(t1) * k, B = std::cos(t1);
  double c = std::cos(k), s = std::sin(k);
  double f1 = A * c + B * s;
  double df1 = -A * k * s + B * k * c;
  return std::cos(t2) * f1 + std::sin(t2) * df1;
}

double norm_sq_closed(double k, double A, double B) {
  if (k == 0.0) return A * A;  // constant eigenfunction
  double s2 = std::sin(2 * k);
  double ss = std::sin(k) * std::sin(k);
  return A * A * (0.5 + s2 / (4 * k)) + B * B * (0.5 - s2 / (4 * k)) + A * B * ss / k;
}

std::vector<double> wavenumbers(const OperatorSpec& spec, int count) {
  double t1 = spec.theta1, t2 = spec.theta2;
  std::vector<double> ks;
  ks.reserve(count);
  if (near(t1, kPi / 2) && near(t2, 0.0)) {
    for (int n = 1; n <= count; ++n) ks.push_back((2 * n - 1) * kPi / 2);
    return ks;
  }
  if (near(t1, kPi / 2) && near(t2, kPi / 2)) {
    for (int n = 1; n <= count; ++n) ks.push_back((n - 1) * kPi);
    return ks;
  }
  // generic: scan for sign changes of the characteristic function
  double step = kPi / 64.0;
  double k0 = 1e-9, g0 = char_fn(k0, t1, t2);
  while (static_cast<int>(ks.size()) < count) {
    double k1 = k0 + step, g1 = char_fn(k1, t1, t2);
    if (g0 == 0.0) {
      ks.push_back(k0);
    } else if (g0 * g1 < 0.0) {
      double a = k0, b = k1;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (a + b);
        if (char_fn(mid, t1, t2) * char_fn(a, t1, t2) <= 0.0)
          b = mid;
        else
          a = mid;
      }
      ks.push_back(0.5 * (a + b));
    }
    k0 = k1;
    g0 = g1;
    if (k0 > (count + 16) * kPi) throw std::runtime_error("wavenumber bracketing failed");
  }
  return ks;
}

void fill_tail_table(SpectralBasis& b, const OperatorSpec& spec) {
  if (!spec.constant_coefficients()) {
    b.tail_lambdas = b.lambdas;
    b.tail_phi0 = b.phi0;
    return;
  }
  double t1 = spec.theta1, t2 = spec.theta2;
  bool special = (near(t1, kPi / 2) && (near(t2, 0.0) || near(t2, kPi / 2)));
  int n_long = special ? 200000 : 50000;
  double pc = spec.p.constant_value(), qc = spec.q.constant_value();
  auto ks = wavenumbers(spec, n_long);
  b.tail_lambdas.resize(n_long);
  b.tail_phi0.resize(n_long);
  for (int i = 0; i < n_long; ++i) {
    double k = ks[i];
    double A = std::sin(t1) * k, B = std::cos(t1);
    if (k == 0.0) A = 1.0, B = 0.0;  // constant mode (Neumann-Neumann)
    double nrm = std::sqrt(norm_sq_closed(k, A, B));
    b.tail_lambdas[i] = pc * k * k + qc;
    b.tail_phi0[i] = A / nrm;
  }
}

}  // namespace

DiscreteOperator discretize(const OperatorSpec& spec, int m, bool use_q_tilde) {
  if (m < 7) throw std::invalid_argument("mesh too small");
  DiscreteOperator op;
  op.h = 1.0 / (m - 1);
  op.grid.resize(m);
  for (int i = 0; i < m; ++i) op.grid[i] = double(i) * op.h;
  op.dirichlet_right = near(spec.theta2, 0.0);
  op.i0 = 0;
  op.i1 = op.dirichlet_right ? m - 2 : m - 1;
  int n = op.active_size();
  op.diag.setZero(n);
  op.sub.setZero(n);
  op.sup.setZero(n);
  op.weights.setZero(n);
  op.input.setZero(n);

  const double h = op.h;
  auto qeff = [&](double x) { return use_q_tilde ? spec.q_tilde(x) : spec.q(x); };
  auto pm = [&](int i) { return spec.p((i + 0.5) * h); };  // p at midpoint i+1/2

  for (int a = 0; a < n; ++a) {
    int i = a + op.i0;
    double x = op.grid[i];
    if (i == 0) {
      double cot1 = std::cos(spec.theta1) / std::sin(spec.theta1);
      op.weights[a] = h / 2;
      op.diag[a] = (pm(0) / h + cot1 * spec.p(0.0) + qeff(0.0) * h / 2) / (h / 2);
      op.sup[a] = -(pm(0) / h) / (h / 2);
    } else if (i == m - 1) {  // Robin at x=1 (Dirichlet was eliminated)
      double cot2 = std::cos(spec.theta2) / std::sin(spec.theta2);
      op.weights[a] = h / 2;
      op.diag[a] = (pm(m - 2) / h + cot2 * spec.p(1.0) + qeff(1.0) * h / 2) / (h / 2);
      op.sub[a] = -(pm(m - 2) / h) / (h / 2);
      // boundary input: -p(1) z_x(1) = -p(1)(u - cos(t2) z)/sin(t2)
      op.input[a] = (spec.p(1.0) / std::sin(spec.theta2)) / (h / 2);
    } else {
      op.weights[a] = h;
      op.diag[a] = ((pm(i - 1) + pm(i)) / h + qeff(x) * h) / h;
      op.sub[a] = -(pm(i - 1) / h) / h;
      op.sup[a] = -(pm(i) / h) / h;
      if (op.dirichlet_right && i == m - 2) {
        op.sup[a] = 0.0;
        op.input[a] = (pm(m - 2) / h) / h;  // eliminated node carries the boundary value
      }
    }
  }
  return op;
}

SpectralBasis solve_eigenproblem(const OperatorSpec& spec, int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  spec.validate();
  const int m = spec.grid_resolution;
  const int ms[3] = {m, 2 * m - 1, 4 * m - 3};
  EigResult lv[3];
  for (int l = 0; l < 3; ++l) lv[l] = eig_level(spec, ms[l], n_modes);

  SpectralBasis b;
  b.n_modes = n_modes;
  b.closed_form = false;
  b.grid = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
  b.weights.setConstant(m, 1.0 / (m - 1));
  b.weights[0] *= 0.5;
  b.weights[m - 1] *= 0.5;
  b.samples = lv[0].vectors;
  b.lambdas.resize(n_modes);
  b.phi0.resize(n_modes);
  b.phi1.resize(n_modes);
  b.dphi1.resize(n_modes);
  for (int j = 0; j < n_modes; ++j) {
    b.lambdas[j] = richardson3(lv[0].lambdas[j], lv[1].lambdas[j], lv[2].lambdas[j]);
    b.phi0[j] = richardson3(lv[0].phi0[j], lv[1].phi0[j], lv[2].phi0[j]);
    b.phi1[j] = richardson3(lv[0].phi1[j], lv[1].phi1[j], lv[2].phi1[j]);
    b.dphi1[j] = richardson3(lv[0].dphi1[j], lv[1].dphi1[j], lv[2].dphi1[j]);
  }
  check_bracket(b.lambdas, spec);
  b.levels.resize(3);
  for (int l = 0; l < 3; ++l) {
    b.levels[l].grid = Eigen::VectorXd::LinSpaced(ms[l], 0.0, 1.0);
    Eigen::VectorXd w;
    w.setConstant(ms[l], 1.0 / (ms[l] - 1));
    w[0] *= 0.5;
    w[ms[l] - 1] *= 0.5;
    b.levels[l].weights = w;
    b.levels[l].lambdas = lv[l].lambdas;
    b.levels[l].samples = std::move(lv[l].vectors);
  }
  fill_tail_table(b, spec);
  return b;
}

SpectralBasis solve_eigenproblem_single(const OperatorSpec& spec, int m, int n_modes) {
  EigResult r = eig_level(spec, m, n_modes);
  SpectralBasis b;
  b.n_modes = n_modes;
  b.grid = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
  b.weights.setConstant(m, 1.0 / (m - 1));
  b.weights[0] *= 0.5;
  b.weights[m - 1] *= 0.5;
  b.lambdas = r.lambdas;
  b.phi0 = r.phi0;
  b.phi1 = r.phi1;
  b.dphi1 = r.dphi1;
  b.samples = std::move(r.vectors);
  b.tail_lambdas = b.lambdas;
  b.tail_phi0 = b.phi0;
  return b;
}

SpectralBasis closed_form_basis(const OperatorSpec& spec, int n_modes, int grid_nodes) {
  if (!spec.constant_coefficients())
    throw std::invalid_argument("closed-form basis requires constant p and q");
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  spec.validate();
  const int m = grid_nodes > 0 ? grid_nodes : spec.grid_resolution;
  const double pc = spec.p.constant_value(), qc = spec.q.constant_value();
  const double t1 = spec.theta1, t2 = spec.theta2;
  auto ks = wavenumbers(spec, n_modes);

  SpectralBasis b;
  b.n_modes = n_modes;
  b.closed_form = true;
  b.grid = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
  b.weights.setConstant(m, 1.0 / (m - 1));
  b.weights[0] *= 0.5;
  b.weights[m - 1] *= 0.5;
  b.lambdas.resize(n_modes);
  b.phi0.resize(n_modes);
  b.phi1.resize(n_modes);
  b.dphi1.resize(n_modes);
  b.samples.resize(m, n_modes);
  b.d2_samples.resize(m, n_modes);
  for (int j = 0; j < n_modes; ++j) {
    double k = ks[j];
    double A = std::sin(t1) * k, B = std::cos(t1);
    if (k == 0.0) A = 1.0, B = 0.0;
    double nrm = std::sqrt(norm_sq_closed(k, A, B));
    A /= nrm;
    B /= nrm;
    b.lambdas[j] = pc * k * k + qc;
    b.phi0[j] = A;
    b.phi1[j] = A * std::cos(k) + B * std::sin(k);
    b.dphi1[j] = -A * k * std::sin(k) + B * k * std::cos(k);
    for (int i = 0; i < m; ++i) {
      double x = b.grid[i];
      double v = A * std::cos(k * x) + B * std::sin(k * x);
      b.samples(i, j) = v;
      b.d2_samples(i, j) = -k * k * v;
    }
  }
  check_bracket(b.lambdas, spec);
  fill_tail_table(b, spec);
  return b;
}

BasisDiagnostics verify_basis(const SpectralBasis& basis, const OperatorSpec& spec) {
  BasisDiagnostics d;
  const int n = basis.n_modes;
  const int m = static_cast<int>(basis.grid.size());
  const double h = basis.grid[1] - basis.grid[0];

  d.monotone_ok = true;
  for (int j = 1; j < n; ++j)
    if (!(basis.lambdas[j] > basis.lambdas[j - 1])) d.monotone_ok = false;

  d.bracket_ok = true;
  for (int j = 1; j <= n; ++j) {
    double lo = kPi * kPi * (j - 1) * (j - 1) * spec.p_lo;
    double hi = kPi * kPi * double(j) * j * spec.p_hi + spec.q_hi;
    double slack = 1e-9 * (1.0 + hi);
    if (!(basis.lambdas[j - 1] >= lo - slack && basis.lambdas[j - 1] <= hi + slack))
      d.bracket_ok = false;
  }

  // Gram deviation in the discrete trapezoid inner product
  Eigen::MatrixXd G = basis.samples.transpose() *
                      basis.weights.asDiagonal() * basis.samples;
  G -= Eigen::MatrixXd::Identity(n, n);
  d.gram_deviation = G.cwiseAbs().maxCoeff();
  double kmax = std::sqrt(std::max(0.0, (basis.lambdas[n - 1] - spec.q.min_value()) /
                                            spec.p_lo));
  d.gram_tol = std::max(1e-10, 0.1 * (kmax * h) * (kmax * h));
  d.gram_ok = d.gram_deviation <= d.gram_tol;

  // eigen-residual: analytic second derivatives when available, otherwise an
  // independent 4th-order stencil applied on interior nodes
  d.eigen_residual.resize(n);
  d.residual_tol.resize(n);
  for (int j = 0; j < n; ++j) {
    double lam = basis.lambdas[j];
    double acc = 0.0, wacc = 0.0;
    if (basis.d2_samples.size() > 0) {
      for (int i = 0; i < m; ++i) {
        double x = basis.grid[i];
        double r = -spec.p(x) * basis.d2_samples(i, j) -
                   spec.p.deriv(x) * 0.0 +  // constant p for closed form
                   (spec.q(x) - lam) * basis.samples(i, j);
        acc += basis.weights[i] * r * r;
        wacc += basis.weights[i];
      }
      d.residual_tol[j] = 1e-12;
    } else {
      for (int i = 2; i + 2 < m; ++i) {
        double x = basis.grid[i];
        const auto& v = basis.samples;
        double f1 = (-v(i + 2, j) + 8 * v(i + 1, j) - 8 * v(i - 1, j) + v(i - 2, j)) /
                    (12 * h);
        double f2 = (-v(i + 2, j) + 16 * v(i + 1, j) - 30 * v(i, j) +
                     16 * v(i - 1, j) - v(i - 2, j)) / (12 * h * h);
        double r = -spec.p(x) * f2 - spec.p.deriv(x) * f1 + (spec.q(x) - lam) * v(i, j);
        acc += h * r * r;
        wacc += h;
      }
      d.residual_tol[j] = std::max(1e-10, 20.0 * h * h * (1.0 + lam));
    }
    d.eigen_residual[j] = std::sqrt(acc) / std::max(1.0, lam);
  }
  d.residual_ok = (d.eigen_residual.array() <= d.residual_tol.array()).all();
  d.pass = d.monotone_ok && d.bracket_ok && d.gram_ok && d.residual_ok;
  return d;
}

}  // namespace rdstab
