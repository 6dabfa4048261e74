#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cotrap/crystal.hpp"
#include "cotrap/drives.hpp"
#include "cotrap/gaussian.hpp"

namespace cotrap {

struct CollapseModel {
  double tau_e = 0.0;  // s, electron coherence time
  double sigma = 0.0;  // m, critical length
  double sigma_p() const;
};

/// Frame in which the momentum kicks are fixed.
enum class KickFrame {
  lab,          // physical momentum kicks; rotate as e^{i omega t} in the interaction picture
  interaction,  // kicks along the interaction-picture imaginary axis
};

struct KickStatistics {
  double gamma = 0.0;        // 1/s
  double sigma_alpha = 0.0;  // std of the mode-space kick
  KickFrame frame = KickFrame::lab;
  std::vector<std::string> warnings;
};

KickStatistics kick_statistics(const CollapseModel& model, const ModeStructure& modes,
                               double flake_mass, double flake_radius = 0.0,
                               KickFrame frame = KickFrame::lab,
                               double separation_factor = 100.0);

/// i n sigma_alpha, n ~ N(0, 1).
Complex sample_jump(const KickStatistics& stats, std::mt19937_64& rng);

/// 64-bit mixing used for all derived seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0);

/**
 * Noiseless in-phase propagators of both branches sampled on the
 * integrator's accepted steps. Jumps are handled in the frame of this
 * reference: a kick D(beta) at t becomes e^{2i Im(beta alpha_b(t)*)}
 * D(L_t^{-1} beta) applied on the right of W_b(t).
 */
class ReferencePropagation {
 public:
  explicit ReferencePropagation(const ProtocolSchedule& schedule, const StepControl& step = {});

  struct Point {
    Complex alpha_up, alpha_down, P, Q;
  };
  /// Cubic Hermite interpolation; cursor makes monotone sweeps O(1).
  Point at(double t, std::size_t& cursor) const;

  const ProtocolSchedule& schedule() const { return schedule_; }
  double total_time() const { return schedule_.total_time(); }
  const GaussianPropagator& final_branch(Spin s) const { return final_[static_cast<int>(s)]; }
  std::size_t size() const { return t_.size(); }

 private:
  ProtocolSchedule schedule_;
  GaussianPropagator final_[2];
  std::vector<double> t_;
  std::vector<Point> v_, dv_;
  bool antisymmetric_ = false;  // alpha_down == -alpha_up on every node
};

enum class JumpSampling { exponential, bernoulli };

struct TrajectoryOptions {
  JumpSampling sampling = JumpSampling::exponential;
  double bernoulli_dt = 0.0;        // s, per-step trial interval
  bool record_jumps = false;
  std::vector<double> injected_times;      // deterministic extra jumps (tests)
  std::vector<Complex> injected_amplitudes;  // lab-frame amplitudes
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::size_t jump_count = 0;
  std::vector<double> jump_times;
  std::vector<Complex> jump_amplitudes;  // as sampled (kick frame)
  GaussianPropagator final_up, final_down;
  double phase_difference = 0.0;  // phi_up - phi_down, rad
};

TrajectoryRecord simulate_trajectory(const ReferencePropagation& ref, const KickStatistics& stats,
                                     std::uint64_t seed, const TrajectoryOptions& opt = {});
TrajectoryRecord simulate_trajectory(const ProtocolSchedule& schedule,
                                     const KickStatistics& stats, std::uint64_t seed,
                                     const TrajectoryOptions& opt = {});

/// Trajectories 0..n-1 with seeds derive_seed(master, i); merged by index.
std::vector<TrajectoryRecord> run_ensemble(const ReferencePropagation& ref,
                                           const KickStatistics& stats, std::uint64_t master_seed,
                                           std::size_t n, unsigned workers,
                                           const TrajectoryOptions& opt = {});

struct VisibilityResult {
  double V = 1.0;
  double V_err = 0.0;
  double mean_phase = 0.0;  // arg of the mean phasor
  double phase_std = 0.0;   // sample std of the phase differences
  std::size_t n = 0;
};

/// |mean e^{i dphi}| with a bootstrap standard error (fixed internal seed).
VisibilityResult ensemble_visibility(const std::vector<TrajectoryRecord>& records,
                                     int bootstrap = 200);
VisibilityResult visibility_from_phases(const std::vector<double>& phases, int bootstrap = 200);

struct DecayPrediction {
  double sigma0 = 0.0;       // rms branch-phase kick at alpha_f
  double sigma_phi = 0.0;    // sqrt(2 Gamma t)
  double V = 1.0;            // exp(-Gamma t)
  double Gamma = 0.0;        // sigma0^2 gamma
  double sigma0_literal = 0.0; // alpha_f sigma_alpha
  double Gamma_literal = 0.0;  // (alpha_f sigma_alpha)^2 gamma
};

/// Phase diffusion of branches held at +-alpha_f for time t.
DecayPrediction analytic_decay(const KickStatistics& stats, Complex alpha_f, double t);

}  // namespace cotrap
