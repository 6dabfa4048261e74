#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotrap/analysis.hpp"
#include "cotrap/collapse.hpp"
#include "cotrap/crystal.hpp"
#include "cotrap/gaussian.hpp"

namespace cotrap {

/// Schema violation; carries the JSON key path and, when known, the source line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, int line, const std::string& what);
  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

enum class Dimension {
  none, mass, charge, length, time, angular_frequency, rate, pressure, temperature,
  inductance, wavenumber, angle,
};

/// "<number> <unit>" to SI. Hz-family units on angular fields are multiplied by 2 pi.
double parse_quantity(const std::string& text, Dimension d);
/// SI value with its canonical unit, printed round-trip exact.
std::string format_quantity(double value, Dimension d);

struct RunConfig {
  struct Crystal {
    ParticleSpec ion{0.0, 0.0, "ion"};
    ParticleSpec flake{0.0, 0.0, "flake"};
    double flake_radius = 0.0;
    double omega1 = 0.0;
    double endcap_distance = 0.0;
    bool eta_given = true;         // eta_inphase fixes raman_wavenumber
    double eta_inphase = 0.0;
    double raman_wavenumber = 0.0;
  } crystal;
  struct Laser {
    double g = 0.0, detuning = 0.0, spin_splitting = 0.0;
  } laser;
  struct Drive {
    double rabi = 0.0;
    double sdf_phase = 0.0;
    PropagationModel inphase_model = PropagationModel::rotating_wave;
  } drive;
  struct Protocol {
    double t_split = 0.0;
    double gain = 1.0;
    std::vector<int> n_hold{0};
    bool commensurate_split = false;
    double hold_offset = 0.0;
  } protocol;
  struct Collapse {
    bool enabled = false;
    double tau_e = 0.0, sigma = 0.0;
    KickFrame frame = KickFrame::lab;
    JumpSampling sampling = JumpSampling::exponential;
    double bernoulli_dt = 0.0;
  } collapse;
  struct Ensemble {
    std::uint64_t trajectories = 1000;
    std::uint64_t seed = 1;
    int bootstrap = 200;
    bool trajectory_log = false;
  } ensemble;
  struct Thermal {
    double nbar_inphase = 0.0, nbar_outofphase = 0.0;
  } thermal;
  Environment environment;
  double budget_delta_x = 0.0;  // 0: twice the flake amplitude of the split run
  struct Exclusion {
    double gamma_bound = 75.0;
    double sigma_min = 1e-9, sigma_max = 1e-4;
    int sigma_points = 41;
    double tau_min = 1e6, tau_max = 1e22;
    int tau_points = 65;
    double delta_x = 6e-10;
  } exclusion;
  struct Oracle {
    int algebra_draws = 100, algebra_N = 60;
    int propagation_drives = 50, propagation_N = 120;
    std::uint64_t seed = 7;
  } oracle;
  struct Output {
    std::string dir = "out";
    int samples = 2001;
  } output;
};

/// Parses a config document (comments allowed). A run manifest is accepted
/// too, in which case its embedded config is used.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical form: SI units, sorted keys; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& c);

ModeStructure config_modes(const RunConfig& c);
TrapSpec config_trap(const RunConfig& c);

}  // namespace cotrap
