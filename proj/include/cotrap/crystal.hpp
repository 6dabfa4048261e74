#pragma once

#include <string>
#include <vector>

namespace cotrap {

struct ParticleSpec {
  double mass = 0.0;    // kg
  double charge = 0.0;  // C, positive
  std::string label;
};

struct TrapSpec {
  double omega1 = 0.0;            // rad/s, axial frequency of the light ion
  double raman_wavenumber = 0.0;  // 1/m, delta k of the Raman beams
  double endcap_distance = 0.0;   // m
};

/**
 * Equilibrium geometry and axial normal modes of the ion/flake crystal.
 *
 * omega_i and omega_o are the closed forms sqrt(xi)*omega1 and
 * sqrt(3)*omega1; they are leading order in 1/mu and e/Q. The exact
 * eigenfrequencies of the linearized problem are kept as diagnostics.
 */
struct ModeStructure {
  double ion_mass = 0.0, flake_mass = 0.0;
  double ion_charge = 0.0, flake_charge = 0.0;
  double omega1 = 0.0;

  double mu = 0.0;
  double xi = 0.0;
  double beta = 0.0;
  double d = 0.0;
  double d_approx = 0.0;  // d^3 without the (1 + e/Q) factor
  double z1_eq = 0.0, z2_eq = 0.0;
  double b1i = 0.0, b2i = 0.0, b1o = 0.0, b2o = 0.0;
  double omega_i = 0.0, omega_o = 0.0;
  double omega_i_hessian = 0.0, omega_o_hessian = 0.0;
  double x0_i = 0.0, x0_o = 0.0;
  double raman_wavenumber = 0.0;
  double eta_i = 0.0, eta_o = 0.0;
};

ModeStructure mode_structure(const ParticleSpec& ion, const ParticleSpec& flake,
                             const TrapSpec& trap);

/// Raman wavenumber that yields a requested in-phase Lamb-Dicke parameter.
double raman_wavenumber_for_eta(const ParticleSpec& ion, const ParticleSpec& flake,
                                const TrapSpec& trap, double eta_i);

/// Potential energy of the two-particle axial crystal (J).
double crystal_potential(const ModeStructure& m, double z1, double z2);

struct LaserSpec {
  double g = 0.0;              // rad/s, single-beam coupling
  double detuning = 0.0;       // rad/s, Delta from the auxiliary level
  double spin_splitting = 0.0; // rad/s, omega_s
};

struct FeasibilityOptions {
  double breakdown_field = 1e9;        // V/m
  double pauthenier_p = 3.0;           // conductor
  double areal_density = 7.6e-7;       // kg/m^2, graphene
  double separation_factor = 100.0;    // threshold used for "<<"
};

struct FeasibilityReport {
  double pauthenier_Q_max = 0.0;
  double flake_mass = 0.0;
  double carbon_atoms = 0.0;
  double rabi_from_laser = 0.0;
  double G_upper_bound = 0.0;
  double alpha_o_upper_bound = 0.0;
  bool charge_within_limit = false;
  std::vector<std::string> violations;
};

FeasibilityReport feasibility(const ParticleSpec& ion, double flake_radius,
                              const ParticleSpec& flake, const LaserSpec& laser,
                              const ModeStructure& modes,
                              const FeasibilityOptions& opt = {});

}  // namespace cotrap
