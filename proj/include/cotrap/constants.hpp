#pragma once

#include <numbers>

namespace cotrap::constants {

// CODATA 2018, SI.
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double epsilon0 = 8.8541878128e-12;     // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double speed_of_light = 299792458.0;    // m/s
inline constexpr double carbon_mass = 12.0 * atomic_mass_unit;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace cotrap::constants
