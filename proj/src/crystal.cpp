#include "cotrap/crystal.hpp"

#include <cmath>
#include <sstream>

#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"

namespace cotrap {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite (got " << v << ")";
    throw ParameterError(os.str());
  }
}

void validate(const ParticleSpec& ion, const ParticleSpec& flake, const TrapSpec& trap) {
  require_positive(ion.mass, "ion mass");
  require_positive(flake.mass, "flake mass");
  require_positive(ion.charge, "ion charge");
  require_positive(flake.charge, "flake charge");
  require_positive(trap.omega1, "omega1");
  if (!(trap.raman_wavenumber >= 0.0)) throw ParameterError("raman wavenumber must be >= 0");
}

}  // namespace

double raman_wavenumber_for_eta(const ParticleSpec& ion, const ParticleSpec& flake,
                                const TrapSpec& trap, double eta_i) {
  TrapSpec t = trap;
  t.raman_wavenumber = 1.0;
  const ModeStructure m = mode_structure(ion, flake, t);
  return eta_i / m.eta_i;
}

ModeStructure mode_structure(const ParticleSpec& ion, const ParticleSpec& flake,
                             const TrapSpec& trap) {
  using namespace constants;
  validate(ion, flake, trap);

  ModeStructure s;
  const double m = ion.mass, M = flake.mass, e = ion.charge, Q = flake.charge;
  const double w1 = trap.omega1;
  s.ion_mass = m;
  s.flake_mass = M;
  s.ion_charge = e;
  s.flake_charge = Q;
  s.omega1 = w1;

  s.mu = M / m;
  s.xi = (Q / M) * (m / e);
  s.beta = 0.5 * (3.0 - s.xi);

  const double k_coul = e * Q / (4.0 * pi * epsilon0);
  s.d = std::cbrt(k_coul * (1.0 + e / Q) / (m * w1 * w1));
  s.d_approx = std::cbrt(k_coul / (m * w1 * w1));
  s.z1_eq = -Q * s.d / (e + Q);
  s.z2_eq = e * s.d / (e + Q);

  s.b1i = 1.0 / std::sqrt(1.0 + s.mu * s.beta * s.beta);
  s.b2i = s.beta * s.b1i;
  s.b2o = s.b1i / std::sqrt(s.mu);
  s.b1o = -s.mu * s.beta * s.b2o;

  s.omega_i = std::sqrt(s.xi) * w1;
  s.omega_o = std::sqrt(3.0) * w1;

  // Exact linearized frequencies: mass-weighted Hessian in units of w1^2 is
  // [[1+2q, -2q/sqrt(mu)], [-2q/sqrt(mu), xi + 2q/mu]] with q = Q/(Q+e).
  {
    const double q = Q / (Q + e);
    const double a = 1.0 + 2.0 * q;
    const double c = s.xi + 2.0 * q / s.mu;
    const double b = -2.0 * q / std::sqrt(s.mu);
    const double tr = a + c;
    const double det = a * c - b * b;
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    const double lam_hi = 0.5 * tr + disc;
    const double lam_lo = det / lam_hi;  // avoids cancellation
    s.omega_i_hessian = std::sqrt(lam_lo) * w1;
    s.omega_o_hessian = std::sqrt(lam_hi) * w1;
  }

  s.x0_i = std::sqrt(hbar / (2.0 * m * s.omega_i));
  s.x0_o = std::sqrt(hbar / (2.0 * m * s.omega_o));
  s.raman_wavenumber = trap.raman_wavenumber;
  s.eta_i = trap.raman_wavenumber * s.b1i * s.x0_i;
  s.eta_o = trap.raman_wavenumber * s.b1o * s.x0_o;
  return s;
}

double crystal_potential(const ModeStructure& s, double z1, double z2) {
  using namespace constants;
  const double m = s.ion_mass, w1 = s.omega1;
  const double k2 = (s.flake_charge / s.ion_charge) * m * w1 * w1;
  return 0.5 * m * w1 * w1 * z1 * z1 + 0.5 * k2 * z2 * z2 +
         s.ion_charge * s.flake_charge / (4.0 * pi * epsilon0 * std::abs(z2 - z1));
}

FeasibilityReport feasibility(const ParticleSpec& ion, double flake_radius,
                              const ParticleSpec& flake, const LaserSpec& laser,
                              const ModeStructure& modes, const FeasibilityOptions& opt) {
  using namespace constants;
  require_positive(flake_radius, "flake radius");
  require_positive(laser.detuning, "laser detuning");
  require_positive(opt.breakdown_field, "breakdown field");

  FeasibilityReport r;
  r.pauthenier_Q_max =
      4.0 * pi * epsilon0 * flake_radius * flake_radius * opt.pauthenier_p * opt.breakdown_field;
  r.charge_within_limit = flake.charge <= r.pauthenier_Q_max;
  r.flake_mass = opt.areal_density * pi * flake_radius * flake_radius;
  r.carbon_atoms = r.flake_mass / carbon_mass;
  r.rabi_from_laser = laser.g * laser.g / (2.0 * laser.detuning);

  const double m = ion.mass;
  const double db_i = std::abs(modes.b1i - modes.b2i);
  r.G_upper_bound = db_i > 0.0 ? std::sqrt(2.0 * m * modes.omega_i / hbar) * modes.d / db_i : 0.0;
  const double ab1o = std::abs(modes.b1o);
  r.alpha_o_upper_bound =
      ab1o > 0.0 ? std::sqrt(2.0 * m * modes.omega_o / hbar) * modes.d / ab1o : 0.0;

  const double k = opt.separation_factor;
  if (!(modes.omega_i * k <= laser.spin_splitting))
    r.violations.push_back("omega_i << omega_s");
  if (!(laser.spin_splitting * k <= laser.detuning))
    r.violations.push_back("omega_s << Delta");
  if (!r.charge_within_limit) r.violations.push_back("Q <= Pauthenier limit");
  return r;
}

}  // namespace cotrap
