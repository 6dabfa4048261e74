#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "cotrap/dopri5.hpp"

namespace cotrap {

using Complex = std::complex<double>;

/// Disc-mapped squeeze variable tau = e^{i theta} tanh r, |tau| < 1.
class SqueezeParam {
 public:
  SqueezeParam() = default;
  explicit SqueezeParam(Complex tau);
  static SqueezeParam from_zeta(Complex zeta);

  Complex tau() const { return tau_; }
  Complex zeta() const;
  double r() const;
  double cosh_r() const;
  Complex e_itheta_sinh_r() const;  // e^{i theta} sinh r = tau cosh r

 private:
  Complex tau_{0.0, 0.0};
};

/// Boundary used for refusing near-singular squeezing.
inline constexpr double kTauLimit = 1.0 - 1e-9;

struct DisplaceComposition {
  Complex result;
  double phase;
};
struct SqueezeComposition {
  Complex tau3;
  Complex sigma3_coeff;  // purely imaginary
};

/// D(a) D(b) = e^{i phase} D(a + b).
DisplaceComposition displace_compose(Complex a, Complex b);
/// S(z1) S(z2) = S(z3) exp(sigma3_coeff * (a^dag a + 1/2)), in tau variables.
SqueezeComposition squeeze_compose(Complex tau1, Complex tau2);
/// gamma with D(alpha) S(zeta) = S(zeta) D(gamma).
Complex commute_disp_squeeze(Complex alpha, Complex zeta);
/// alpha with D(alpha) S(zeta) = S(zeta) D(gamma).
Complex commute_squeeze_disp(Complex gamma, Complex zeta);

/// Amplitude of the form A sin(nu t - phase).
struct Tone {
  double amplitude = 0.0;  // rad/s
  double frequency = 0.0;  // rad/s
  double phase = 0.0;      // rad
  bool operator==(const Tone&) const = default;
};

/// Closed-form waveform offset + sum of tones.
struct Waveform {
  double offset = 0.0;
  std::vector<Tone> tones;

  double operator()(double t) const;
  bool is_zero() const;
  Waveform negated() const;
  bool operator==(const Waveform&) const = default;
};

struct DriveSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  Waveform f;  // linear drive, rad/s
  Waveform g;  // quadratic drive, rad/s
  bool operator==(const DriveSegment&) const = default;
};

/// Piecewise drive; segments are contiguous and ordered in time.
struct DriveFunction {
  std::vector<DriveSegment> segments;

  double t_start() const;
  double t_end() const;
  double f(double t) const;
  double g(double t) const;
  void validate() const;
  bool operator==(const DriveFunction&) const = default;
};

/// How the interaction-picture coefficients are formed from (f, g, omega).
enum class PropagationModel {
  exact,          // all e^{i omega t} terms kept
  rotating_wave,  // terms oscillating faster than rwa_cutoff * omega dropped
};

/// One term c e^{i w t} of a coefficient series.
struct SpectralTerm {
  Complex c;
  double w;
};

/**
 * Coefficients of H = lambda a + lambda* a^dag + (kappa a^2 + kappa* a^dag^2)/2
 * + nu (a^dag a + 1/2) for one drive segment. In the exact model
 * lambda = f e^{i omega t}, kappa = g e^{2 i omega t}, nu = g.
 */
struct SegmentCoefficients {
  std::vector<SpectralTerm> lambda, kappa, nu;

  static SegmentCoefficients build(const DriveSegment& seg, double omega,
                                   PropagationModel model, double rwa_cutoff);
  Complex lambda_at(double t) const;
  Complex kappa_at(double t) const;
  double nu_at(double t) const;
  bool is_zero() const { return lambda.empty() && kappa.empty() && nu.empty(); }
};

struct GaussianPropagator {
  Complex alpha{0.0, 0.0};
  SqueezeParam tau;
  double phi = 0.0;
  double chi = 0.0;
  double t = 0.0;
  double omega = 0.0;
};

/// Debug split of the accumulated phases.
struct PhaseLedger {
  double geometric = 0.0;        // phi
  double number_rotation = 0.0;  // \int nu dt, part of chi
  double squeeze_merge = 0.0;    // -\int Re(kappa tau) dt, part of chi
};

/// Snapshot handed to propagation observers after each accepted step.
struct PropagationSample {
  GaussianPropagator state;
  Complex dalpha, dtau;
  double dphi, dchi;
  Complex lambda, kappa;
  double nu;
};

struct PropagateOptions {
  StepControl step{};
  PropagationModel model = PropagationModel::exact;
  double rwa_cutoff = 0.5;
  PhaseLedger* ledger = nullptr;
  std::function<void(const PropagationSample&)> observer;
};

/// Integrates the ansatz ODEs from state.t to drive.t_end().
GaussianPropagator propagate(const GaussianPropagator& state, const DriveFunction& drive,
                             const PropagateOptions& opt = {});
GaussianPropagator propagate(const GaussianPropagator& state, const DriveFunction& drive,
                             double dt_max);

/// alpha_sdf (G - 1) / ln G, continuous at G = 1.
Complex amplified_displacement(double G, Complex alpha_sdf);

/// Operator product A B written back in ansatz form; t and omega taken from A.
GaussianPropagator multiply(const GaussianPropagator& A, const GaussianPropagator& B);
/// Operator inverse in ansatz form.
GaussianPropagator inverse(const GaussianPropagator& A);
/// D(beta) U in ansatz form.
GaussianPropagator displace(const GaussianPropagator& U, Complex beta);

/// Linear (Bogoliubov) part of the propagator: x -> P x + Q x*.
struct Bogoliubov {
  Complex P{1.0, 0.0}, Q{0.0, 0.0};
  Complex apply(Complex x) const { return P * x + Q * std::conj(x); }
  Complex apply_inverse(Complex y) const { return std::conj(P) * y - Q * std::conj(y); }
};
Bogoliubov bogoliubov(const GaussianPropagator& U);

}  // namespace cotrap
