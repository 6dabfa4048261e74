#include <doctest.h>

#include <cmath>

#include "cotrap/analysis.hpp"
#include "cotrap/collapse.hpp"
#include "cotrap/drives.hpp"
#include "cotrap/errors.hpp"
#include "fixtures.hpp"

using namespace cotrap;

namespace {

double branch_visibility(const GaussianPropagator& up, const GaussianPropagator& down) {
  const GaussianPropagator rel = multiply(inverse(down), up);
  return general_gaussian_visibility(rel.alpha, rel.tau.zeta(), -rel.chi, {0.0}).V;
}

}  // namespace

TEST_CASE("spin-dependent force waveforms") {
  const auto m = fixtures::modes();
  const auto s = fixtures::sdf(m);
  CHECK(s.phase_down() == doctest::Approx(s.phase_up + M_PI));
  const Waveform up = sdf_inphase_drive(s, m, Spin::up), dn = sdf_inphase_drive(s, m, Spin::down);
  for (double t : {0.0, 1.3e-5, 7.7e-4}) CHECK(up(t) == doctest::Approx(-dn(t)).epsilon(1e-12));
  CHECK(up.tones.front().amplitude == doctest::Approx(s.rabi * m.eta_i));
  const PADrive pa = pa_for_sdf(s, m, 100.0);
  CHECK(pa.frequency == doctest::Approx(2.0 * m.omega_i));
  CHECK_THROWS_AS(pa_inphase_drive({-1.0, 1.0, 0.0}), ParameterError);
}

TEST_CASE("resonant force alone reproduces alpha_SDF within 1% in the exact model") {
  const auto m = fixtures::modes();
  // Weak force: omega_i / (Omega_R eta_i) >= 1e4.
  SDFDrive s{m.omega_i / (1e4 * m.eta_i), m.omega_i, 0.0};
  const double ts = commensurate_time(1e-3, m);
  const auto sch = build_schedule(s, pa_for_sdf(s, m, 0.0), m, ts, 0, PropagationModel::exact);
  const ReferencePropagation ref(sch);
  std::size_t cur = 0;
  const Complex a = ref.at(ts, cur).alpha_up;
  const double a_sdf = 0.5 * s.rabi * m.eta_i * ts;
  CHECK(std::abs(a) / a_sdf == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("calibrated parametric amplification gives the (G-1)/ln G gain factor") {
  const auto m = fixtures::modes();
  const auto s = fixtures::sdf(m);
  const auto cal = calibrate_pa(s, m, 1e-3, 10.0, PropagationModel::rotating_wave);
  CHECK(cal.gain == doctest::Approx(10.0).epsilon(1e-5));
  // Rotating-wave estimate r = Omega t_s / 4.
  CHECK(cal.strength == doctest::Approx(4.0 * std::log(10.0) / 1e-3).epsilon(0.01));
  const auto sch = build_schedule(s, pa_for_sdf(s, m, cal.strength), m, 1e-3, 0);
  const ReferencePropagation ref(sch);
  std::size_t cur = 0;
  const Complex a = ref.at(1e-3, cur).alpha_up;
  const double a_sdf = 0.5 * s.rabi * m.eta_i * 1e-3;
  CHECK(std::abs(a) / a_sdf == doctest::Approx(9.0 / std::log(10.0)).epsilon(0.02));
}

TEST_CASE("G = 1 limit: no amplification, linear displacement") {
  const auto m = fixtures::modes();
  const auto s = fixtures::sdf(m);
  const auto cal = calibrate_pa(s, m, 1e-3, 1.0, PropagationModel::rotating_wave);
  CHECK(cal.strength == 0.0);
  const auto sch = build_schedule(s, pa_for_sdf(s, m, 0.0), m, 1e-3, 0);
  const ReferencePropagation ref(sch);
  std::size_t cur = 0;
  const double a_sdf = 0.5 * s.rabi * m.eta_i;
  for (double t : {1e-4, 3e-4, 5e-4}) CHECK(std::abs(ref.at(t, cur).alpha_up) == doctest::Approx(a_sdf * t));
  CHECK_THROWS_AS(calibrate_pa(s, m, 1e-3, 0.5, PropagationModel::rotating_wave), ParameterError);
}

TEST_CASE("noiseless protocol closes and the spin branches are antisymmetric") {
  for (int n_hold : {0, 3}) {
    const auto sch = fixtures::schedule(n_hold);
    for (Spin sp : {Spin::up, Spin::down}) {
      const auto r = run_branch(sch, Mode::in_phase, sp);
      CHECK(std::abs(r.final_state.alpha) < 1e-6);
      CHECK(std::abs(r.final_state.tau.tau()) < 1e-6);
      CHECK(r.final_state.t == doctest::Approx(sch.total_time()));
    }
    const auto up = run_branch(sch, Mode::in_phase, Spin::up, true);
    const auto dn = run_branch(sch, Mode::in_phase, Spin::down, true);
    REQUIRE(up.samples.size() == dn.samples.size());
    double asym = 0.0, tau_diff = 0.0;
    for (std::size_t k = 0; k < up.samples.size(); ++k) {
      asym = std::max(asym, std::abs(up.samples[k].state.alpha + dn.samples[k].state.alpha));
      tau_diff = std::max(tau_diff, std::abs(up.samples[k].state.tau.tau() - dn.samples[k].state.tau.tau()));
    }
    CHECK(asym < 1e-12);
    CHECK(tau_diff < 1e-12);
    CHECK(branch_visibility(up.final_state, dn.final_state) > 1.0 - 1e-9);
  }
}

TEST_CASE("split amplitude and real-space excursion") {
  const auto m = fixtures::modes();
  const auto sch = fixtures::schedule();
  const ReferencePropagation ref(sch);
  std::size_t cur = 0;
  const Complex a = ref.at(1e-3, cur).alpha_up;
  const double amp = real_space_amplitude(a, m, Particle::flake);
  CHECK(amp == doctest::Approx(2.0 * std::abs(a) * std::abs(m.b2i) * m.x0_i));
  CHECK(amp > 1e-10);
  CHECK(amp < 1e-8);
}

TEST_CASE("commensurate split time keeps the out-of-phase mode closed") {
  const auto m = fixtures::modes();
  const auto s = fixtures::sdf(m);
  const double ts = commensurate_time(1e-3, m);
  CHECK(std::fmod(ts * m.omega_i / (2.0 * M_PI), 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  const auto cal = calibrate_pa(s, m, ts, 10.0, PropagationModel::rotating_wave);
  const auto sch = build_schedule(s, pa_for_sdf(s, m, cal.strength), m, ts, 0);
  const auto up = run_branch(sch, Mode::out_of_phase, Spin::up);
  const auto dn = run_branch(sch, Mode::out_of_phase, Spin::down);
  CHECK(branch_visibility(up.final_state, dn.final_state) >= 0.99);
}

TEST_CASE("schedule JSON round trip") {
  const auto sch = fixtures::schedule(2);
  const auto back = schedule_from_json(schedule_to_json(sch));
  CHECK(back.t_split == sch.t_split);
  CHECK(back.t_hold == sch.t_hold);
  CHECK(back.n_hold_periods == sch.n_hold_periods);
  CHECK(back.omega_i == sch.omega_i);
  CHECK(back.omega_o == sch.omega_o);
  CHECK(back.pa.strength == sch.pa.strength);
  CHECK(back.inphase_model == sch.inphase_model);
  for (int mo = 0; mo < 2; ++mo)
    for (int sp = 0; sp < 2; ++sp) CHECK(back.drives[mo][sp] == sch.drives[mo][sp]);
  CHECK(schedule_to_json(back) == schedule_to_json(sch));
  CHECK_THROWS(schedule_from_json(R"({"schema":"other"})"));
}

TEST_CASE("schedule validation") {
  const auto m = fixtures::modes();
  const auto s = fixtures::sdf(m);
  CHECK_THROWS_AS(build_schedule(s, {}, m, 0.0, 0), ParameterError);
  CHECK_THROWS_AS(build_schedule(s, {}, m, 1e-3, -1), ParameterError);
  const auto sch = fixtures::schedule(1);
  const auto b = sch.boundaries();
  CHECK(b[5] == doctest::Approx(sch.total_time()));
  CHECK(sch.t_hold == doctest::Approx(2.0 * M_PI / m.omega_i));
}
