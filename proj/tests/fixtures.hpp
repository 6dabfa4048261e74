#pragma once

#include "cotrap/constants.hpp"
#include "cotrap/crystal.hpp"
#include "cotrap/drives.hpp"

namespace fixtures {

inline cotrap::ParticleSpec ion() {
  return {174.0 * cotrap::constants::atomic_mass_unit, cotrap::constants::elementary_charge, "Yb"};
}
inline cotrap::ParticleSpec flake() {
  return {1e9 * cotrap::constants::atomic_mass_unit, 430.0 * cotrap::constants::elementary_charge,
          "flake"};
}
inline cotrap::TrapSpec trap(double eta_i = 2e-4) {
  cotrap::TrapSpec t{cotrap::constants::two_pi * 1e6, 0.0, 1.1e-3};
  t.raman_wavenumber = cotrap::raman_wavenumber_for_eta(ion(), flake(), t, eta_i);
  return t;
}
inline cotrap::ModeStructure modes() { return cotrap::mode_structure(ion(), flake(), trap()); }

inline cotrap::SDFDrive sdf(const cotrap::ModeStructure& m, double rabi_hz = 5e6) {
  return {cotrap::constants::two_pi * rabi_hz, m.omega_i, 0.0};
}

/// Calibrated G = 10, t_s = 1 ms protocol in the rotating-wave model.
inline cotrap::ProtocolSchedule schedule(int n_hold = 0, double t_split = 1e-3, double G = 10.0) {
  const auto m = modes();
  const auto s = sdf(m);
  const auto cal = cotrap::calibrate_pa(s, m, t_split, G, cotrap::PropagationModel::rotating_wave);
  return cotrap::build_schedule(s, cotrap::pa_for_sdf(s, m, cal.strength), m, t_split, n_hold);
}

}  // namespace fixtures
