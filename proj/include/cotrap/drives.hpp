#pragma once

#include <array>
#include <string>

#include "cotrap/crystal.hpp"
#include "cotrap/gaussian.hpp"

namespace cotrap {

enum class Spin { up = 0, down = 1 };
enum class Mode { in_phase = 0, out_of_phase = 1 };

struct SDFDrive {
  double rabi = 0.0;       // Omega_R, rad/s
  double detuning = 0.0;   // delta, rad/s (resonant: omega_i)
  double phase_up = 0.0;   // rad
  double phase_down() const;
  double phase(Spin s) const { return s == Spin::up ? phase_up : phase_down(); }
};

struct PADrive {
  double strength = 0.0;   // Omega_PA, rad/s
  double frequency = 0.0;  // rad/s, nominally 2 omega_i
  double phase = 0.0;      // rad, first-half phase
};

/// f(t) = Omega_R eta_i sin(delta t - phi_spin).
Waveform sdf_inphase_drive(const SDFDrive& sdf, const ModeStructure& modes, Spin spin);
/// g(t) = Omega_PA sin(omega_PA t - phi_PA).
Waveform pa_inphase_drive(const PADrive& pa);

/// Effective Lamb-Dicke parameter of the off-resonant PA force on the out-of-phase mode.
double eta_o_pa(const PADrive& pa, const SDFDrive& sdf, const ModeStructure& modes);

struct OutOfPhaseDrive {
  Waveform f, g;
};
/// Linear and quadratic drives on the out-of-phase mode (propagated with omega_o).
OutOfPhaseDrive outofphase_drives(const SDFDrive& sdf, const PADrive& pa,
                                  const ModeStructure& modes, Spin spin);

/**
 * Split (two halves, PA phase flipped), hold, recombine (same PA sequence
 * with the SDF inverted). Times: [0, ts/2) [ts/2, ts) [ts, ts+tint)
 * [ts+tint, ts+tint+ts/2) [.., 2ts+tint).
 */
struct ProtocolSchedule {
  double t_split = 0.0;
  double t_hold = 0.0;
  int n_hold_periods = 0;
  double omega_i = 0.0, omega_o = 0.0;
  SDFDrive sdf;
  PADrive pa;
  PropagationModel inphase_model = PropagationModel::rotating_wave;
  PropagationModel outofphase_model = PropagationModel::exact;
  // [mode][spin]
  std::array<std::array<DriveFunction, 2>, 2> drives;

  double total_time() const { return 2.0 * t_split + t_hold; }
  const DriveFunction& drive(Mode m, Spin s) const {
    return drives[static_cast<int>(m)][static_cast<int>(s)];
  }
  double omega(Mode m) const { return m == Mode::in_phase ? omega_i : omega_o; }
  PropagationModel model(Mode m) const {
    return m == Mode::in_phase ? inphase_model : outofphase_model;
  }
  /// Boundaries of the five segments (six values).
  std::array<double, 6> boundaries() const;
};

ProtocolSchedule build_schedule(const SDFDrive& sdf, const PADrive& pa, const ModeStructure& modes,
                                double t_split, int n_hold_periods,
                                PropagationModel inphase_model = PropagationModel::rotating_wave,
                                double hold_offset = 0.0);

/// Nearest whole number (>= 1) of in-phase periods to t.
double commensurate_time(double t, const ModeStructure& modes);

/// In-phase PA phase convention: squeeze the force quadrature first (phase 2 phi_up).
PADrive pa_for_sdf(const SDFDrive& sdf, const ModeStructure& modes, double strength);

enum class Particle { ion, flake };
/// Real-space oscillation amplitude 2 |alpha| b x0_i of the in-phase mode.
double real_space_amplitude(Complex alpha, const ModeStructure& modes, Particle which);

struct PACalibration {
  double strength = 0.0;  // Omega_PA
  double gain = 0.0;      // measured e^r at t_s/2
  int iterations = 0;
};
/// Bisection on Omega_PA so that e^{r(t_s/2)} = G_target.
PACalibration calibrate_pa(const SDFDrive& sdf, const ModeStructure& modes, double t_split,
                           double G_target, PropagationModel model, double rel_tol = 1e-6);

struct BranchRun {
  GaussianPropagator final_state;
  std::vector<PropagationSample> samples;  // filled when requested
};
/// Noiseless propagation of one branch from vacuum frame (U = 1 at t = 0).
BranchRun run_branch(const ProtocolSchedule& s, Mode m, Spin spin, bool keep_samples = false,
                     const StepControl& step = {});

std::string schedule_to_json(const ProtocolSchedule& s);
ProtocolSchedule schedule_from_json(const std::string& text);

}  // namespace cotrap
