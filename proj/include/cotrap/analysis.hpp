#pragma once

#include <string>
#include <vector>

#include "cotrap/collapse.hpp"
#include "cotrap/crystal.hpp"
#include "cotrap/fock.hpp"
#include "cotrap/gaussian.hpp"

namespace cotrap {

using ThermalState = fock::ThermalState;

/// |Tr{D(alpha) rho_th}| = exp(-|alpha|^2 (nbar + 1/2)).
double displaced_thermal_visibility(Complex alpha, const ThermalState& th);

struct GaussianVisibility {
  double V = 0.0;
  int N = 0;            // truncation used
  bool converged = false;
};

/// |Tr{D(alpha) S(zeta) e^{i Phi (n + 1/2)} rho_th}| by the Fock oracle,
/// doubling N until the value is stable to `tol`.
GaussianVisibility general_gaussian_visibility(Complex alpha, Complex zeta, double Phi,
                                               const ThermalState& th, double tol = 1e-7,
                                               int N_max = 512);

/// Full width at half maximum in |alpha| of displaced_thermal_visibility.
double visibility_fwhm(const ThermalState& th);

/// P_up(mu) = (1 + V cos(mu + offset)) / 2.
std::vector<double> fringe_pattern(double V, double phase_offset, const std::vector<double>& mu);

struct FringeFit {
  double V = 0.0, V_err = 0.0;
  double phase_offset = 0.0;
  double mean = 0.0;
};
/// Least squares P = a + b cos mu + c sin mu.
FringeFit fit_fringe(const std::vector<double>& mu, const std::vector<double>& p_up);

struct DecayFit {
  double Gamma = 0.0, Gamma_err = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95 % interval
  double V0 = 0.0;
  double chi2 = 0.0;
};
/// Weighted fit of ln V = ln V0 - Gamma t. Empty or zero errors give an
/// unweighted fit with the residual-based standard error.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& V,
                   const std::vector<double>& V_err = {});

/// log10(|1/ln f| (M/m_e)^2 (dx/R)^2 t/1s).
double macroscopicity(double M, double R, double delta_x, double t, double f);

struct ExclusionGeometry {
  ModeStructure modes;
  double flake_mass = 0.0;
  double flake_radius = 0.0;
  Complex alpha_f;         // branch amplitude at the nominal t_split
  double t_split = 0.0;
  double delta_x = 0.0;    // separation used for the macroscopicity
  KickFrame frame = KickFrame::lab;
};

struct ReferencePoint {
  std::string label;
  double sigma = 0.0, tau_e = 0.0;
  double Gamma = 0.0;
  bool excluded = false;
};

struct ExclusionRegion {
  std::vector<double> sigma, tau_e;
  std::vector<std::vector<double>> Gamma;     // [i_sigma][i_tau]
  std::vector<std::vector<double>> t_used;    // splitting time actually usable
  std::vector<std::vector<char>> excluded;    // [i_sigma][i_tau]
  double Gamma_bound = 0.0;
  double macroscopicity = 0.0;
  std::vector<ReferencePoint> references;     // GRW, Adler
};

struct ExclusionPoint {
  double Gamma = 0.0, t_used = 0.0;
  bool excluded = false;
};
/**
 * Gamma grows as t_s^2 through alpha_f; when Gamma(t_s) t_s > 1 the splitting
 * time is reduced to t* with Gamma(t*) t* = 1 before comparing against the bound.
 */
ExclusionPoint exclusion_point(double Gamma_bound, const ExclusionGeometry& g, double sigma,
                               double tau_e);
ExclusionRegion exclusion_region(double Gamma_bound, const ExclusionGeometry& g,
                                 const std::vector<double>& sigma,
                                 const std::vector<double>& tau_e);
std::vector<double> log_grid(double lo, double hi, int n);

struct Environment {
  double pressure = 0.0;            // Pa
  double gas_temperature = 293.0;   // K
  double gas_molecule_mass = 0.0;   // kg
  double circuit_inductance = 0.0;  // H
  double circuit_omega = 0.0;       // rad/s
  double circuit_temperature = 0.0; // K
  double endcap_distance = 0.0;     // m
  double target_rate_min = 100.0;   // 1/s
  double target_rate_max = 1000.0;  // 1/s
  double sr_threshold = 0.1;        // "<< 1"
  double quoted_pressure = 1e-14;   // Pa, reported for comparison only
};

struct BudgetEntry {
  std::string name;
  double value = 0.0;
  std::string unit;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct DecoherenceBudget {
  double gas_rate = 0.0;                 // 1/s
  double pressure_for_target = 0.0;      // Pa giving target_rate_min
  double debroglie_length = 0.0;         // m at gas_temperature
  double debroglie_threshold = 0.0;      // K
  double photon_threshold = 0.0;         // K
  double sr_velocity = 0.0, sr_current = 0.0, sr_figure = 0.0;
  double total_rate = 0.0;
  bool pass = false;
  std::vector<BudgetEntry> entries;
  std::vector<std::string> flags;
};

double gas_collision_rate(double pressure, double radius, double molecule_mass, double T);
/// pi hbar / sqrt(2 pi m k T).
double thermal_debroglie_length(double molecule_mass, double T);
/// Temperature at which the thermal de Broglie length equals a.
double debroglie_threshold_temperature(double molecule_mass, double a);
double photon_threshold_temperature(double delta_x);
double shockley_ramo_figure(double current, double L, double omega_lc, double T);

/// delta_x is the branch separation; the oscillation amplitude is delta_x / 2.
DecoherenceBudget decoherence_budget(const Environment& env, const ModeStructure& modes,
                                     double flake_radius, double delta_x, double Q);

}  // namespace cotrap
