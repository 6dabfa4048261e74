#include <doctest.h>

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "cotrap/collapse.hpp"
#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"
#include "fixtures.hpp"

using namespace cotrap;

namespace {

constexpr Complex I{0.0, 1.0};

const ReferencePropagation& reference() {
  static const ReferencePropagation ref(fixtures::schedule());
  return ref;
}

KickStatistics grw() {
  const auto m = fixtures::modes();
  return kick_statistics({1e16, 1e-7}, m, m.flake_mass);
}

// Copy of the drive restricted to [t_start, t].
DriveFunction clip(const DriveFunction& d, double t) {
  DriveFunction out;
  for (auto seg : d.segments) {
    if (seg.t_start >= t) break;
    seg.t_end = std::min(seg.t_end, t);
    out.segments.push_back(seg);
  }
  return out;
}

// Branch propagator with lab-frame kicks applied directly in the ansatz.
GaussianPropagator kicked_branch(const ProtocolSchedule& s, Spin spin, const std::vector<double>& times,
                                 const std::vector<Complex>& kicks) {
  const DriveFunction& d = s.drive(Mode::in_phase, spin);
  PropagateOptions opt;
  opt.model = s.model(Mode::in_phase);
  GaussianPropagator U;
  U.omega = s.omega_i;
  for (std::size_t k = 0; k < times.size(); ++k) {
    U = propagate(U, clip(d, times[k]), opt);
    U = displace(U, kicks[k] * std::polar(1.0, s.omega_i * times[k]));
  }
  return propagate(U, d, opt);
}

}  // namespace

TEST_CASE("GRW kick statistics") {
  const auto m = fixtures::modes();
  const auto k = grw();
  const double r = m.flake_mass / constants::electron_mass;
  CHECK(k.gamma == doctest::Approx(r * r / 1e16));
  CHECK(k.gamma > 1e8);
  CHECK(k.gamma < 1e9);
  CHECK(k.sigma_alpha == doctest::Approx(m.x0_i * m.b2i / 1e-7));
  CHECK(k.warnings.empty());
  CHECK_FALSE(kick_statistics({1e16, 1e-7}, m, m.flake_mass, 0.8e-6).warnings.empty());
  CHECK_THROWS_AS(kick_statistics({0.0, 1e-7}, m, m.flake_mass), ParameterError);
  CHECK_THROWS_AS(kick_statistics({1e16, -1.0}, m, m.flake_mass), ParameterError);
  CHECK(CollapseModel{1e16, 1e-7}.sigma_p() == doctest::Approx(constants::hbar / 1e-7));
}

TEST_CASE("sampled jumps are momentum kicks with the kick standard deviation") {
  const auto k = grw();
  std::mt19937_64 rng(42);
  const int n = 1'000'000;
  double m1 = 0.0, m2 = 0.0, re = 0.0;
  for (int i = 0; i < n; ++i) {
    const Complex j = sample_jump(k, rng);
    re = std::max(re, std::abs(j.real()));
    m1 += j.imag();
    m2 += j.imag() * j.imag();
  }
  m1 /= n;
  const double sd = std::sqrt(m2 / n - m1 * m1);
  CHECK(re == 0.0);
  CHECK(std::abs(m1) < 5.0 * k.sigma_alpha / std::sqrt(n));
  CHECK(sd == doctest::Approx(k.sigma_alpha).epsilon(5e-3));
}

TEST_CASE("derived seeds are distinct and deterministic") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 0, 1) != derive_seed(1, 0, 2));
}

TEST_CASE("trajectories are reproducible from their seed") {
  auto k = grw();
  k.gamma *= 1e-3;
  const auto a = simulate_trajectory(reference(), k, 99);
  const auto b = simulate_trajectory(reference(), k, 99);
  const auto c = simulate_trajectory(reference(), k, 100);
  CHECK(a.jump_count == b.jump_count);
  CHECK(a.phase_difference == b.phase_difference);
  CHECK(a.phase_difference != c.phase_difference);
}

TEST_CASE("no collapse gives no jumps and no phase difference") {
  KickStatistics k;
  const auto r = simulate_trajectory(reference(), k, 1);
  CHECK(r.jump_count == 0);
  CHECK(std::abs(r.phase_difference) < 1e-9);
  const auto v = ensemble_visibility(run_ensemble(reference(), k, 5, 50, 1));
  CHECK(v.V == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single kick at the split time produces the analytic phase difference") {
  const auto& ref = reference();
  const double ts = ref.schedule().t_split;
  std::size_t cur = 0;
  const Complex af = ref.at(ts, cur).alpha_up;
  KickStatistics k;
  for (double s : {1e-3, -4e-3, 2e-2}) {
    TrajectoryOptions opt;
    opt.injected_times = {ts};
    opt.injected_amplitudes = {I * s};
    const auto r = simulate_trajectory(ref, k, 0, opt);
    const Complex beta = I * s * std::polar(1.0, ref.schedule().omega_i * ts);
    CHECK(r.jump_count == 1);
    CHECK(r.phase_difference == doctest::Approx(4.0 * std::imag(beta * std::conj(af))).epsilon(1e-7));
  }
}

TEST_CASE("kicks in the reference frame match direct propagation of kicked branches") {
  const auto& ref = reference();
  const auto& s = ref.schedule();
  const std::vector<double> times = {1.1e-4, 0.5e-3, 0.93e-3, 1.0e-3, 1.37e-3, 1.8e-3};
  const std::vector<Complex> kicks = {I * 3e-3, -I * 1e-2, I * 2e-3, I * 5e-3, -I * 7e-3, I * 4e-3};
  TrajectoryOptions opt;
  opt.injected_times = times;
  opt.injected_amplitudes = kicks;
  const auto r = simulate_trajectory(ref, KickStatistics{}, 0, opt);
  const auto up = kicked_branch(s, Spin::up, times, kicks);
  const auto dn = kicked_branch(s, Spin::down, times, kicks);
  CHECK(r.phase_difference == doctest::Approx(up.phi - dn.phi).epsilon(1e-6));
  CHECK(std::abs(r.final_up.alpha - up.alpha) < 1e-7);
  CHECK(std::abs(r.final_down.alpha - dn.alpha) < 1e-7);
}

TEST_CASE("jumps are common-mode: branches recombine and squeezing closes") {
  auto k = grw();
  k.gamma *= 1e-2;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto r = simulate_trajectory(reference(), k, seed);
    CHECK(r.jump_count > 0);
    CHECK(std::abs(r.final_up.alpha - r.final_down.alpha) < 1e-6);
    CHECK(std::abs(r.final_up.tau.tau()) < 1e-6);
    CHECK(std::abs(r.final_down.tau.tau()) < 1e-6);
  }
}

TEST_CASE("jump counts are Poisson(gamma T)") {
  const auto& ref = reference();
  KickStatistics k = grw();
  const double mean = 3.0;
  k.gamma = mean / ref.total_time();
  const auto recs = run_ensemble(ref, k, 2024, 10'000, 1);
  const int bins = 10;  // 0..8, >= 9
  std::vector<double> obs(bins, 0.0);
  for (const auto& r : recs) obs[std::min<std::size_t>(r.jump_count, bins - 1)] += 1.0;
  double chi2 = 0.0, pk = std::exp(-mean), cum = 0.0;
  for (int j = 0; j < bins; ++j) {
    const double p = j == bins - 1 ? 1.0 - cum : pk;
    const double e = p * recs.size();
    chi2 += (obs[j] - e) * (obs[j] - e) / e;
    cum += pk;
    pk *= mean / (j + 1);
  }
  const double pvalue = boost::math::gamma_q(0.5 * (bins - 1), 0.5 * chi2);
  CAPTURE(chi2);
  CHECK(pvalue > 0.01);
}

TEST_CASE("Bernoulli sampling agrees with exponential waiting times in distribution") {
  const auto& ref = reference();
  KickStatistics k = grw();
  k.gamma = 2.0 / ref.total_time();
  TrajectoryOptions opt;
  opt.sampling = JumpSampling::bernoulli;
  opt.bernoulli_dt = ref.total_time() / 2000.0;
  const auto recs = run_ensemble(ref, k, 3, 4000, 1, opt);
  double m = 0.0;
  for (const auto& r : recs) m += r.jump_count;
  m /= recs.size();
  CHECK(m == doctest::Approx(2.0).epsilon(0.05));
  opt.bernoulli_dt = 0.0;
  CHECK_THROWS_AS(simulate_trajectory(ref, k, 1, opt), ParameterError);
}

TEST_CASE("ensemble is invariant under worker count and record order") {
  auto k = grw();
  k.gamma *= 1e-3;
  const auto a = run_ensemble(reference(), k, 77, 64, 1);
  const auto b = run_ensemble(reference(), k, 77, 64, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].phase_difference == b[i].phase_difference);
  }
  auto c = a;
  std::mt19937_64 rng(5);
  std::shuffle(c.begin(), c.end(), rng);
  const auto va = ensemble_visibility(a), vc = ensemble_visibility(c);
  CHECK(va.V == vc.V);
  CHECK(va.V_err == vc.V_err);
  CHECK(va.phase_std == vc.phase_std);
}

TEST_CASE("visibility of a Gaussian phase ensemble") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.7);
  std::vector<double> ph(20'000);
  for (auto& p : ph) p = n(rng);
  const auto v = visibility_from_phases(ph);
  CHECK(v.V == doctest::Approx(std::exp(-0.5 * 0.49)).epsilon(0.01));
  CHECK(v.phase_std == doctest::Approx(0.7).epsilon(0.02));
  CHECK(v.V_err > 0.0);
  CHECK(v.V_err < 0.01);
}

TEST_CASE("analytic decay prediction") {
  const auto k = grw();
  const Complex af(-12.28, 0.0);
  const auto d0 = analytic_decay(k, af, 0.0);
  CHECK(d0.V == 1.0);
  const auto d = analytic_decay(k, af, 1e-4);
  CHECK(d.sigma0 == doctest::Approx(2.0 * k.sigma_alpha * std::abs(af)));
  CHECK(d.Gamma == doctest::Approx(d.sigma0 * d.sigma0 * k.gamma));
  CHECK(d.V == doctest::Approx(std::exp(-d.Gamma * 1e-4)));
  CHECK(d.sigma_phi == doctest::Approx(std::sqrt(2.0 * d.Gamma * 1e-4)));
  CHECK(d.Gamma_literal == doctest::Approx(std::pow(std::abs(af) * k.sigma_alpha, 2) * k.gamma));
  CHECK(d.Gamma_literal > 1e2);
  CHECK(d.Gamma_literal < 1e4);
  // Doubling the amplitude quadruples the rate.
  CHECK(analytic_decay(k, 2.0 * af, 1e-4).Gamma == doctest::Approx(4.0 * d.Gamma));
}
