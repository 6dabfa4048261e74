#include "cotrap/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"

namespace cotrap {

using namespace constants;

// ---------------------------------------------------------------- visibility

double displaced_thermal_visibility(Complex alpha, const ThermalState& th) {
  if (th.nbar < 0.0) throw ParameterError("thermal state: nbar must be >= 0");
  return std::exp(-std::norm(alpha) * (th.nbar + 0.5));
}

GaussianVisibility general_gaussian_visibility(Complex alpha, Complex zeta, double Phi,
                                               const ThermalState& th, double tol, int N_max) {
  if (th.nbar < 0.0) throw ParameterError("thermal state: nbar must be >= 0");
  // Start where the thermal weight beyond N/2 is negligible.
  const double q = th.nbar / (th.nbar + 1.0);
  int N = 32;
  while (q > 0.0 && N < N_max && std::pow(q, N / 2) > 1e-3 * tol) N *= 2;
  auto eval = [&](int n) {
    const fock::TruncatedOperator op = fock::matrix_displacement(alpha, n) *
                                       fock::matrix_squeeze(zeta, n) *
                                       fock::matrix_rotation(-Phi, n);
    return std::abs(fock::thermal_overlap(op, th, n / 2));
  };
  GaussianVisibility out;
  double prev = eval(N);
  while (2 * N <= N_max) {
    const double next = eval(2 * N);
    N *= 2;
    if (std::abs(next - prev) <= tol) {
      out.V = next;
      out.N = N;
      out.converged = true;
      return out;
    }
    prev = next;
  }
  out.V = prev;
  out.N = N;
  return out;
}

double visibility_fwhm(const ThermalState& th) {
  // exp(-x^2 (n + 1/2)) = 1/2
  return 2.0 * std::sqrt(std::log(2.0) / (th.nbar + 0.5));
}

std::vector<double> fringe_pattern(double V, double phase_offset, const std::vector<double>& mu) {
  std::vector<double> p;
  p.reserve(mu.size());
  for (double m : mu) p.push_back(0.5 * (1.0 + V * std::cos(m + phase_offset)));
  return p;
}

FringeFit fit_fringe(const std::vector<double>& mu, const std::vector<double>& p_up) {
  if (mu.size() != p_up.size() || mu.size() < 3)
    throw ParameterError("fit_fringe: need >= 3 matching samples");
  const auto n = static_cast<Eigen::Index>(mu.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::cos(mu[i]);
    A(i, 2) = std::sin(mu[i]);
    y(i) = p_up[i];
  }
  const Eigen::MatrixXd AtA = A.transpose() * A;
  const Eigen::Vector3d x = AtA.ldlt().solve(A.transpose() * y);
  FringeFit f;
  f.mean = x(0);
  // b cos mu + c sin mu = (V/2) cos(mu + offset)
  f.V = 2.0 * std::hypot(x(1), x(2));
  f.phase_offset = std::atan2(-x(2), x(1));
  if (n > 3) {
    const double s2 = (A * x - y).squaredNorm() / static_cast<double>(n - 3);
    const Eigen::Matrix3d cov = s2 * AtA.inverse();
    const double r = std::hypot(x(1), x(2));
    if (r > 0.0) {
      const double gb = x(1) / r, gc = x(2) / r;
      const double var = gb * gb * cov(1, 1) + gc * gc * cov(2, 2) + 2 * gb * gc * cov(1, 2);
      f.V_err = 2.0 * std::sqrt(std::max(0.0, var));
    }
  }
  return f;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& V,
                   const std::vector<double>& V_err) {
  if (t.size() != V.size() || t.size() < 2)
    throw ParameterError("fit_decay: need >= 2 matching samples");
  if (!V_err.empty() && V_err.size() != V.size())
    throw ParameterError("fit_decay: error list length mismatch");
  bool weighted = !V_err.empty();
  for (double e : V_err) weighted = weighted && e > 0.0;
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  std::vector<double> w(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(V[i] > 0.0)) throw ParameterError("fit_decay: visibilities must be positive");
    const double sy = weighted ? V_err[i] / V[i] : 1.0;
    w[i] = 1.0 / (sy * sy);
    const double y = std::log(V[i]);
    S += w[i];
    Sx += w[i] * t[i];
    Sy += w[i] * y;
    Sxx += w[i] * t[i] * t[i];
    Sxy += w[i] * t[i] * y;
  }
  const double det = S * Sxx - Sx * Sx;
  if (!(det > 0.0)) throw ParameterError("fit_decay: degenerate time grid");
  const double slope = (S * Sxy - Sx * Sy) / det;
  const double icpt = (Sxx * Sy - Sx * Sxy) / det;
  DecayFit f;
  f.Gamma = -slope;
  f.V0 = std::exp(icpt);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = std::log(V[i]) - (icpt + slope * t[i]);
    f.chi2 += w[i] * r * r;
  }
  double var_slope = S / det;
  if (!weighted) {
    const double dof = static_cast<double>(t.size()) - 2.0;
    var_slope *= dof > 0 ? f.chi2 / dof : 0.0;
  }
  f.Gamma_err = std::sqrt(var_slope);
  f.ci_low = f.Gamma - 1.96 * f.Gamma_err;
  f.ci_high = f.Gamma + 1.96 * f.Gamma_err;
  return f;
}

// ---------------------------------------------------------------- macroscopicity

double macroscopicity(double M, double R, double delta_x, double t, double f) {
  if (!(f > 0.0 && f < 1.0)) throw ParameterError("macroscopicity: f must lie in (0, 1)");
  if (!(M > 0.0 && R > 0.0 && delta_x > 0.0 && t > 0.0))
    throw ParameterError("macroscopicity: M, R, delta_x and t must be positive");
  const double ratio = M / electron_mass;
  const double geom = delta_x / R;
  return std::log10(std::abs(1.0 / std::log(f)) * ratio * ratio * geom * geom * t);
}

// ---------------------------------------------------------------- exclusion

ExclusionPoint exclusion_point(double Gamma_bound, const ExclusionGeometry& g, double sigma,
                               double tau_e) {
  if (!(g.t_split > 0.0)) throw ParameterError("exclusion: t_split must be positive");
  const KickStatistics k = kick_statistics({tau_e, sigma}, g.modes, g.flake_mass, 0.0, g.frame);
  const double G = analytic_decay(k, g.alpha_f, 0.0).Gamma;
  ExclusionPoint p;
  p.t_used = g.t_split;
  p.Gamma = G;
  if (G * g.t_split > 1.0) {
    // Gamma(t) = c t^2; solve Gamma(t*) t* = 1.
    const double c = G / (g.t_split * g.t_split);
    p.t_used = std::cbrt(1.0 / c);
    p.Gamma = 1.0 / p.t_used;
  }
  p.excluded = p.Gamma > Gamma_bound;
  return p;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw ParameterError("log_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> v(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) v[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
  return v;
}

ExclusionRegion exclusion_region(double Gamma_bound, const ExclusionGeometry& g,
                                 const std::vector<double>& sigma,
                                 const std::vector<double>& tau_e) {
  if (!(Gamma_bound > 0.0)) throw ParameterError("exclusion: Gamma bound must be positive");
  ExclusionRegion r;
  r.sigma = sigma;
  r.tau_e = tau_e;
  r.Gamma_bound = Gamma_bound;
  for (double s : sigma) {
    std::vector<double> gr, tu;
    std::vector<char> ex;
    for (double te : tau_e) {
      const ExclusionPoint p = exclusion_point(Gamma_bound, g, s, te);
      gr.push_back(p.Gamma);
      tu.push_back(p.t_used);
      ex.push_back(p.excluded ? 1 : 0);
    }
    r.Gamma.push_back(std::move(gr));
    r.t_used.push_back(std::move(tu));
    r.excluded.push_back(std::move(ex));
  }
  if (std::isfinite(Gamma_bound) && g.delta_x > 0.0 && g.flake_radius > 0.0)
    r.macroscopicity =
        macroscopicity(g.flake_mass, g.flake_radius, g.delta_x, 1.0 / Gamma_bound, 1.0 / std::exp(1.0));
  for (const auto& [label, s, te] : {std::tuple<const char*, double, double>{"GRW", 1e-7, 1e16},
                                     std::tuple<const char*, double, double>{"Adler", 1e-7, 1e8}}) {
    const ExclusionPoint p = exclusion_point(Gamma_bound, g, s, te);
    r.references.push_back({label, s, te, p.Gamma, p.excluded});
  }
  return r;
}

// ---------------------------------------------------------------- budget

double gas_collision_rate(double pressure, double radius, double molecule_mass, double T) {
  if (pressure < 0.0 || !(radius > 0.0) || !(molecule_mass > 0.0) || !(T > 0.0))
    throw ParameterError("gas_collision_rate: invalid arguments");
  return 16.0 * pi * std::sqrt(2.0 * pi) / 3.0 * pressure * radius * radius /
         std::sqrt(molecule_mass * boltzmann * T);
}

double thermal_debroglie_length(double molecule_mass, double T) {
  return pi * hbar / std::sqrt(2.0 * pi * molecule_mass * boltzmann * T);
}

double debroglie_threshold_temperature(double molecule_mass, double a) {
  if (!(a > 0.0) || !(molecule_mass > 0.0)) throw ParameterError("de Broglie: invalid arguments");
  return pi * hbar * hbar / (2.0 * molecule_mass * boltzmann * a * a);
}

double photon_threshold_temperature(double delta_x) {
  if (!(delta_x > 0.0)) throw ParameterError("photon threshold: delta_x must be positive");
  return hbar * speed_of_light / (boltzmann * delta_x);
}

double shockley_ramo_figure(double current, double L, double omega_lc, double T) {
  if (!(L > 0.0) || !(omega_lc > 0.0)) throw ParameterError("Shockley-Ramo: L and omega must be > 0");
  const double scale = std::sqrt(hbar * omega_lc / L);
  const double c = T > 0.0 ? 1.0 / std::tanh(hbar * omega_lc / (2.0 * boltzmann * T)) : 1.0;
  return std::abs(current) / scale * c;
}

DecoherenceBudget decoherence_budget(const Environment& env, const ModeStructure& modes,
                                     double flake_radius, double delta_x, double Q) {
  if (!(delta_x > 0.0) || !(flake_radius > 0.0)) throw ParameterError("budget: geometry must be positive");
  if (!(env.endcap_distance > 0.0)) throw ParameterError("budget: endcap distance must be positive");
  DecoherenceBudget b;
  const double amplitude = 0.5 * delta_x;

  b.gas_rate = gas_collision_rate(env.pressure, flake_radius, env.gas_molecule_mass, env.gas_temperature);
  const double per_pa = gas_collision_rate(1.0, flake_radius, env.gas_molecule_mass, env.gas_temperature);
  b.pressure_for_target = env.target_rate_min / per_pa;
  b.debroglie_length = thermal_debroglie_length(env.gas_molecule_mass, env.gas_temperature);
  b.debroglie_threshold = debroglie_threshold_temperature(env.gas_molecule_mass, amplitude);
  b.photon_threshold = photon_threshold_temperature(delta_x);
  b.sr_velocity = modes.omega_i * amplitude;
  b.sr_current = Q * b.sr_velocity / env.endcap_distance;
  b.sr_figure = shockley_ramo_figure(b.sr_current, env.circuit_inductance, env.circuit_omega,
                                     env.circuit_temperature);
  b.total_rate = b.gas_rate;

  const bool gas_ok = b.gas_rate <= env.target_rate_max;
  const bool photon_ok = env.gas_temperature < b.photon_threshold;
  const bool sr_ok = b.sr_figure < env.sr_threshold;
  const bool db_suppressed = env.gas_temperature < b.debroglie_threshold;
  b.entries = {
      {"gas_collisions", b.gas_rate, "1/s", env.target_rate_max, gas_ok,
       "rate at the configured pressure"},
      {"debroglie_threshold", b.debroglie_threshold, "K", env.gas_temperature, true,
       db_suppressed ? "gas colder than threshold: collisional which-path suppressed"
                     : "gas warmer than threshold: collisions resolve the paths"},
      {"thermal_photons", b.photon_threshold, "K", env.gas_temperature, photon_ok,
       "photon wavelengths resolve the separation only above this temperature"},
      {"shockley_ramo", b.sr_figure, "1", env.sr_threshold, sr_ok,
       "circuit-overlap exponent; must be << 1"},
  };
  b.pass = gas_ok && photon_ok && sr_ok;
  {
    const double rate_at_quote = gas_collision_rate(env.quoted_pressure, flake_radius,
                                                    env.gas_molecule_mass, env.gas_temperature);
    std::ostringstream os;
    os << "quoted pressure " << env.quoted_pressure << " Pa gives " << rate_at_quote
       << " 1/s by the collision formula; the formula needs " << b.pressure_for_target
       << " Pa for " << env.target_rate_min << " 1/s";
    b.flags.push_back(os.str());
  }
  return b;
}

}  // namespace cotrap
