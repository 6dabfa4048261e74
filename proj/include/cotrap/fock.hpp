#pragma once

// Truncated number-basis oracle: dense matrices for D, S and direct
// Schrodinger integration. Deliberately simple; not used on hot paths.

#include <Eigen/Dense>

#include "cotrap/gaussian.hpp"

namespace cotrap::fock {

struct TruncatedOperator {
  int N = 0;
  Eigen::MatrixXcd m;
};

struct TruncatedState {
  int N = 0;
  Eigen::VectorXcd v;

  /// Occupation beyond 0.8 N.
  double tail_mass() const;
  bool reliable(double bound = 1e-8) const { return tail_mass() <= bound; }
};

struct ThermalState {
  double nbar = 0.0;
  static ThermalState from_temperature(double T, double omega);
};

TruncatedOperator identity(int N);
TruncatedOperator annihilation(int N);
TruncatedOperator creation(int N);
TruncatedOperator number(int N);

TruncatedOperator matrix_displacement(Complex alpha, int N);
TruncatedOperator matrix_squeeze(Complex zeta, int N);
/// exp(-i chi (a^dag a + 1/2)).
TruncatedOperator matrix_rotation(double chi, int N);
/// e^{i phi} D(alpha) S(zeta) e^{-i chi sigma3} assembled from matrices.
TruncatedOperator matrix_propagator(const GaussianPropagator& U, int N);

TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b);

TruncatedState vacuum(int N);
TruncatedState number_state(int n, int N);
TruncatedState apply(const TruncatedOperator& op, const TruncatedState& s);

Complex inner(const TruncatedState& a, const TruncatedState& b);
double fidelity(const TruncatedState& a, const TruncatedState& b);

struct NumericOptions {
  StepControl step{1e-11, 1e-13, 0.0, 0.0, 50'000'000};
  PropagationModel model = PropagationModel::exact;
  double rwa_cutoff = 0.5;
};

/**
 * i d psi/dt = H(t) psi on the truncated ladder, with the interaction-picture
 * H = f X + g X^2 / 2, X = a e^{i omega t} + a^dag e^{-i omega t} (exact model),
 * from drive.t_start() to drive.t_end().
 */
TruncatedState propagate_numeric(const TruncatedState& initial, const DriveFunction& drive,
                                 double omega, const NumericOptions& opt = {});

/// Tr{O rho_th}, thermal weights renormalized to the first N levels.
Complex thermal_overlap(const TruncatedOperator& op, const ThermalState& th, int N);

}  // namespace cotrap::fock
