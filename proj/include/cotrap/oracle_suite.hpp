#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cotrap/gaussian.hpp"

namespace cotrap {

struct OracleCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  int cases = 0;
  bool pass = false;
  std::string detail;
  std::vector<int> failing;  // case indices above tolerance
};

struct OracleSuiteOptions {
  int algebra_draws = 100;
  int algebra_N = 60;
  double block_fraction = 1.0 / 3.0;        // compared on the leading block
  double alpha_max = 1.5, zeta_max = 0.3;   // algebra draw ranges
  int propagation_drives = 50;
  int propagation_N = 120;
  std::uint64_t seed = 7;
  double algebra_tol = 1e-8;
  double fidelity_tol = 1e-6;
  std::string inject_fault;       // name of a check whose sign convention is flipped
};

/// combD, combS, comm (both directions), multiply and inverse against Fock matrices.
std::vector<OracleCheck> algebra_checks(const OracleSuiteOptions& opt);

/// A random SDF+PA style drive (two segments, exact model) with its end-state bounds.
struct RandomDrive {
  DriveFunction drive;
  double omega = 1.0;
  GaussianPropagator final_state;
};
/// Draws until the Gaussian path satisfies |alpha| <= alpha_max and |zeta| <= zeta_max.
RandomDrive random_bounded_drive(std::uint64_t seed, double alpha_max = 4.0, double zeta_max = 1.5);

/// Seed of the k-th drive drawn by propagation_check.
std::uint64_t propagation_drive_seed(std::uint64_t suite_seed, int k);

/// End-state fidelity of the Gaussian ansatz against direct Fock integration.
OracleCheck propagation_check(const OracleSuiteOptions& opt);

/// Confirms Tr{D(alpha) rho_th} = exp(-|alpha|^2 (n + 1/2)) and rejects the linear-|alpha| form.
OracleCheck visibility_convention_check(const OracleSuiteOptions& opt);

/// Thermal overlap stable under N -> 2N.
OracleCheck truncation_stability_check(const OracleSuiteOptions& opt);

std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& opt);

}  // namespace cotrap
