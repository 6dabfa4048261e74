// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cotrap/analysis.hpp"
#include "cotrap/collapse.hpp"
#include "cotrap/commands.hpp"
#include "cotrap/config.hpp"
#include "cotrap/constants.hpp"
#include "cotrap/crystal.hpp"
#include "cotrap/drives.hpp"
#include "cotrap/fock.hpp"
#include "cotrap/oracle_suite.hpp"

using namespace cotrap;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------- tolerances

constexpr double kMuTarget = 5.7e6, kMuTol = 0.02;
constexpr double kRatioTarget = 200.0, kRatioTol = 0.01;
constexpr double kDTarget = 21e-6, kDTol = 0.05;
constexpr double kXiTol = 1e-12;
constexpr int kOracleDrives = 50, kOracleN = 120;
constexpr double kFidelityTol = 1e-6;
constexpr int kAlgebraDraws = 100, kAlgebraN = 60;
constexpr double kAlgebraTol = 1e-8;
constexpr double kSdfLawTol = 0.01, kHierarchy = 1e4;
constexpr double kGainTarget = 10.0, kGainFactorTol = 0.02;
constexpr double kClosureTol = 1e-6, kAsymmetryTol = 1e-6;
constexpr double kPhaseStdLow = 0.5, kPhaseStdHigh = 2.0;
constexpr std::size_t kGrwTrajectories = 1000;
constexpr std::size_t kSweepTrajectories = 10000;
constexpr double kSweepTauE = 1e17;  // s; keeps V(t_int) resolvable across the sweep
constexpr double kGammaTol = 0.20;
constexpr double kMacroCaption = 16.4, kMacroCaptionTol = 0.1;
constexpr double kMacroText = 17.0, kMacroTextTol = 0.3, kMacroTextF = 0.98;
constexpr double kDebroglieTarget = 70e-3, kDebroglieTol = 0.10;
constexpr double kSrTarget = 6.5e-3, kSrTol = 0.10;
constexpr double kPhotonOrder = 1e6, kPhotonFactor = 3.0;
constexpr double kGBoundOrder = 1e6, kAlphaBoundOrder = 1e4, kBoundFactor = 3.0;

// ---------------------------------------------------------------- reporting

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> diagnostics;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.summary = std::string("exception: ") + e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.summary.c_str(), dt);
  for (const auto& d : o.diagnostics) std::printf("       - %s\n", d.c_str());
  std::fflush(stdout);
  failures += !o.pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within_rel(double v, double target, double tol) { return std::abs(v / target - 1.0) <= tol; }
bool within_factor(double v, double target, double k) { return v >= target / k && v <= target * k; }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cotrap_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& cmd, const RunConfig& c, unsigned w) {
  std::ostringstream log;
  CommandContext ctx{w, &log, ""};
  return run_command(cmd, c, ctx);
}

const RunConfig& defaults() {
  static const RunConfig c = parse_config("{}");
  return c;
}

// ---------------------------------------------------------------- criteria

Outcome c1_modes() {
  const RunConfig& c = defaults();
  const ModeStructure m = config_modes(c);
  const double xi_exact = (c.crystal.flake.charge / c.crystal.ion.charge) * (c.crystal.ion.mass / c.crystal.flake.mass);
  const double ratio = m.omega_o / m.omega_i;
  Outcome o;
  o.pass = within_rel(m.mu, kMuTarget, kMuTol) && std::abs(m.xi / xi_exact - 1.0) <= kXiTol &&
           within_rel(ratio, kRatioTarget, kRatioTol) && within_rel(m.d, kDTarget, kDTol);
  o.summary = fmt("mu %.5g, xi %.5g, omega_o/omega_i %.5g, d %.4g um", m.mu, m.xi, ratio, m.d * 1e6);
  return o;
}

Outcome c2_oracle() {
  OracleSuiteOptions opt;
  opt.propagation_drives = kOracleDrives;
  opt.propagation_N = kOracleN;
  opt.fidelity_tol = kFidelityTol;
  const OracleCheck chk = propagation_check(opt);
  Outcome o;
  o.pass = chk.pass && chk.cases == kOracleDrives;
  o.summary = fmt("%d drives at N=%d, worst 1-F %.3g, %zu above %.0e", chk.cases, kOracleN, chk.max_error,
                  chk.failing.size(), kFidelityTol);
  // Re-run failing drives at twice the truncation to separate ansatz error from cutoff error.
  for (int k : chk.failing) {
    const RandomDrive r = random_bounded_drive(propagation_drive_seed(opt.seed, k));
    const int N = 2 * kOracleN;
    const auto numeric = fock::propagate_numeric(fock::vacuum(N), r.drive, r.omega);
    const auto wide = fock::apply(fock::matrix_propagator(r.final_state, 2 * N), fock::vacuum(2 * N));
    const fock::TruncatedState ref{N, wide.v.head(N)};
    o.diagnostics.push_back(fmt("drive %d: 1-F %.3g at N=%d (tail mass %.2g)", k,
                                1.0 - fock::fidelity(ref, numeric), N, numeric.tail_mass()));
  }
  return o;
}

Outcome c3_algebra() {
  OracleSuiteOptions opt;
  opt.algebra_draws = kAlgebraDraws;
  opt.algebra_N = kAlgebraN;
  opt.algebra_tol = kAlgebraTol;
  Outcome o;
  o.pass = true;
  std::string s;
  for (const auto& chk : algebra_checks(opt)) {
    if (chk.name != "combD" && chk.name != "combS" && chk.name != "comm") continue;
    o.pass = o.pass && chk.pass && chk.cases == kAlgebraDraws;
    s += fmt("%s %.2g  ", chk.name.c_str(), chk.max_error);
  }
  o.summary = s + fmt("(%d draws, N=%d)", kAlgebraDraws, kAlgebraN);
  return o;
}

Outcome c4_rwa_law() {
  const RunConfig& c = defaults();
  const Experiment e = make_experiment(c);
  const ModeStructure& m = e.modes;
  // Force-only: weak drive with omega_i / (Omega_R eta_i) = kHierarchy, exact model.
  const SDFDrive weak{m.omega_i / (kHierarchy * m.eta_i), m.omega_i, 0.0};
  const double ts = c.protocol.t_split;
  const auto s0 = build_schedule(weak, pa_for_sdf(weak, m, 0.0), m, ts, 0, PropagationModel::exact);
  const ReferencePropagation r0(s0);
  std::size_t cur = 0;
  const double law = std::abs(r0.at(ts, cur).alpha_up) / (0.5 * weak.rabi * m.eta_i * ts);
  // Force + amplification at the calibrated gain.
  const ReferencePropagation r1(e.schedule(0));
  cur = 0;
  const double measured = std::abs(r1.at(e.t_split, cur).alpha_up) / (0.5 * e.sdf.rabi * m.eta_i * e.t_split);
  const double expected = (kGainTarget - 1.0) / std::log(kGainTarget);
  Outcome o;
  o.pass = std::abs(law - 1.0) <= kSdfLawTol && within_rel(e.calibration.gain, kGainTarget, 1e-5) &&
           within_rel(measured, expected, kGainFactorTol);
  o.summary = fmt("alpha/alpha_SDF %.6f (force only); gain G %.6g gives %.5f vs (G-1)/ln G %.5f", law,
                  e.calibration.gain, measured, expected);
  // Counter-rotating terms leave a residual ~ 1/(omega_i t_s) that vanishes on whole periods.
  const double tc = commensurate_time(ts, m);
  const auto sc = build_schedule(weak, pa_for_sdf(weak, m, 0.0), m, tc, 0, PropagationModel::exact);
  const ReferencePropagation rc(sc);
  cur = 0;
  o.diagnostics.push_back(fmt("force only at t_s = %.6g ms (whole in-phase periods): alpha/alpha_SDF %.6f",
                              tc * 1e3, std::abs(rc.at(tc, cur).alpha_up) / (0.5 * weak.rabi * m.eta_i * tc)));
  return o;
}

Outcome c5_closure() {
  const Experiment e = make_experiment(defaults());
  const ProtocolSchedule s = e.schedule(0);
  const BranchRun up = run_branch(s, Mode::in_phase, Spin::up, true);
  const BranchRun dn = run_branch(s, Mode::in_phase, Spin::down, true);
  double closure = 0.0;
  for (const auto* b : {&up, &dn})
    closure = std::max({closure, std::abs(b->final_state.alpha), std::abs(b->final_state.tau.tau())});
  double asym = 0.0;
  const bool same_grid = up.samples.size() == dn.samples.size();
  for (std::size_t k = 0; same_grid && k < up.samples.size(); ++k)
    asym = std::max(asym, std::abs(up.samples[k].state.alpha + dn.samples[k].state.alpha));
  Outcome o;
  o.pass = same_grid && closure <= kClosureTol && asym <= kAsymmetryTol;
  o.summary = fmt("max final |alpha|,|tau| %.2g; max |alpha_up+alpha_down| %.2g over %zu samples", closure,
                  asym, up.samples.size());
  return o;
}

Outcome c6_collapse() {
  const RunConfig& c = defaults();
  const Experiment e = make_experiment(c);
  const ModeStructure& m = e.modes;
  Outcome o;

  // (a) GRW phase spread.
  const KickStatistics grw = kick_statistics({1e16, 1e-7}, m, c.crystal.flake.mass);
  const ReferencePropagation ref(e.schedule(0));
  const auto recs = run_ensemble(ref, grw, c.ensemble.seed, kGrwTrajectories, workers());
  const VisibilityResult v = ensemble_visibility(recs);
  double m1 = 0.0, m2 = 0.0;
  for (const auto& r : recs) m1 += r.final_up.phi;
  m1 /= recs.size();
  for (const auto& r : recs) m2 += (r.final_up.phi - m1) * (r.final_up.phi - m1);
  const double branch_std = std::sqrt(m2 / (recs.size() - 1));
  const bool a_ok = v.phase_std >= kPhaseStdLow && v.phase_std <= kPhaseStdHigh;

  // (b) decay-rate sweep through the collapse-mc command.
  RunConfig sweep = c;
  sweep.collapse.enabled = true;
  sweep.collapse.tau_e = kSweepTauE;
  sweep.collapse.sigma = 1e-7;
  sweep.protocol.n_hold = {0, 2, 4, 6, 8};
  sweep.ensemble.trajectories = kSweepTrajectories;
  const fs::path dir = scratch("sweep");
  sweep.output.dir = dir.string();
  const int rc = run("collapse-mc", sweep, workers());
  const json sum = json::parse(slurp(dir / "collapse_summary.json"));
  const double G_fit = sum.at("fit").at("Gamma_1_s"), G_err = sum.at("fit").at("Gamma_err_1_s");
  const double G_an = sum.at("analytic").at("Gamma_1_s");
  const double G_lit = sum.at("analytic").at("Gamma_literal_1_s");
  const bool b_ok = rc == exit_ok && std::abs(G_fit / G_an - 1.0) <= kGammaTol;
  fs::remove_all(dir);

  o.pass = a_ok && b_ok;
  o.summary = fmt("(a) GRW phase-difference std %.3f rad [%s, window %.1f-%.1f]; (b) fitted Gamma %.0f +- %.0f vs "
                  "sigma0^2 gamma %.0f 1/s, ratio %.3f [%s]",
                  v.phase_std, a_ok ? "ok" : "out", kPhaseStdLow, kPhaseStdHigh, G_fit, G_err, G_an,
                  G_fit / G_an, b_ok ? "ok" : "out");
  o.diagnostics.push_back(fmt("GRW: %zu trajectories, mean %.0f jumps, V %.3f, single-branch phase std %.3f rad",
                              recs.size(), grw.gamma * ref.total_time(), v.V, branch_std));
  o.diagnostics.push_back(fmt("sweep: tau_e %.0e s, sigma 100 nm, n_hold 0-8 periods, %zu trajectories/point; "
                              "literal (alpha_f sigma_alpha)^2 gamma = %.0f 1/s",
                              kSweepTauE, kSweepTrajectories, G_lit));
  return o;
}

Outcome c7_macroscopicity() {
  const RunConfig& c = defaults();
  const double M = c.crystal.flake.mass, R = c.crystal.flake_radius, dx = c.exclusion.delta_x;
  const double caption = macroscopicity(M, R, dx, 1.0 / c.exclusion.gamma_bound, 1.0 / std::exp(1.0));
  const double text = macroscopicity(M, R, dx, 1e-3, kMacroTextF);
  Outcome o;
  o.pass = std::abs(caption - kMacroCaption) <= kMacroCaptionTol && std::abs(text - kMacroText) <= kMacroTextTol;
  o.summary = fmt("f=1/e, t=1/%.0f s: %.4f; f=%.2f, t=1 ms: %.4f", c.exclusion.gamma_bound, caption, kMacroTextF,
                  text);
  return o;
}

Outcome c8_budget() {
  const RunConfig& c = defaults();
  const Experiment e = make_experiment(c);
  const ReferencePropagation ref(e.schedule(0));
  std::size_t cur = 0;
  const double dx = 2.0 * real_space_amplitude(ref.at(e.t_split, cur).alpha_up, e.modes, Particle::flake);
  const DecoherenceBudget b =
      decoherence_budget(c.environment, e.modes, c.crystal.flake_radius, dx, c.crystal.flake.charge);
  const double sr_quoted = shockley_ramo_figure(2e-18, c.environment.circuit_inductance, c.environment.circuit_omega,
                                                c.environment.circuit_temperature);
  Outcome o;
  o.pass = within_rel(b.debroglie_threshold, kDebroglieTarget, kDebroglieTol) &&
           within_rel(b.sr_figure, kSrTarget, kSrTol) && within_rel(sr_quoted, kSrTarget, kSrTol) &&
           within_factor(b.photon_threshold, kPhotonOrder, kPhotonFactor);
  o.summary = fmt("de Broglie %.2f mK, Shockley-Ramo %.3g, photon %.3g K (delta_x %.3g nm)", b.debroglie_threshold * 1e3,
                  b.sr_figure, b.photon_threshold, dx * 1e9);
  o.diagnostics.push_back(fmt("Shockley-Ramo at the quoted I = 2e-18 A: %.3g; model current %.3g A", sr_quoted,
                              b.sr_current));
  o.diagnostics.push_back(fmt("gas: %.3g 1/s at %.0e Pa; formula needs %.3g Pa for %.0f 1/s (not an acceptance item)",
                              b.gas_rate, c.environment.pressure, b.pressure_for_target, c.environment.target_rate_min));
  return o;
}

Outcome c9_bounds() {
  const RunConfig& c = defaults();
  const ModeStructure m = config_modes(c);
  const LaserSpec laser{c.laser.g, c.laser.detuning, c.laser.spin_splitting};
  const FeasibilityReport f = feasibility(c.crystal.ion, c.crystal.flake_radius, c.crystal.flake, laser, m);
  Outcome o;
  o.pass = within_factor(f.G_upper_bound, kGBoundOrder, kBoundFactor) &&
           within_factor(f.alpha_o_upper_bound, kAlphaBoundOrder, kBoundFactor);
  o.summary = fmt("G bound %.3g, alpha_o bound %.4g", f.G_upper_bound, f.alpha_o_upper_bound);
  return o;
}

Outcome c10_determinism() {
  RunConfig c = defaults();
  c.collapse.enabled = true;
  c.collapse.tau_e = kSweepTauE;
  c.collapse.sigma = 1e-7;
  c.protocol.n_hold = {0, 2};
  c.ensemble.trajectories = 200;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  c.output.dir = a.string();
  const int ra = run("collapse-mc", c, 1);
  c.output.dir = b.string();
  const unsigned wb = std::max(3u, workers());
  const int rb = run("collapse-mc", c, wb);
  const std::string ca = slurp(a / "visibility.csv"), cb = slurp(b / "visibility.csv");
  Outcome o;
  o.pass = ra == exit_ok && rb == exit_ok && !ca.empty() && ca == cb;
  o.summary = fmt("visibility.csv with 1 and %u workers: %s (%zu bytes)", wb, ca == cb ? "identical" : "DIFFERENT",
                  ca.size());
  fs::remove_all(a);
  fs::remove_all(b);
  return o;
}

}  // namespace

int main() {
  std::printf("cotrap acceptance suite (%u worker threads)\n", workers());
  criterion(1, "mode-structure golden numbers", c1_modes);
  criterion(2, "Gaussian vs Fock oracle", c2_oracle);
  criterion(3, "operator-algebra identities", c3_algebra);
  criterion(4, "RWA displacement law", c4_rwa_law);
  criterion(5, "protocol closure and antisymmetry", c5_closure);
  criterion(6, "collapse Monte Carlo", c6_collapse);
  criterion(7, "macroscopicity", c7_macroscopicity);
  criterion(8, "decoherence budget numbers", c8_budget);
  criterion(9, "linearization bounds", c9_bounds);
  criterion(10, "determinism across worker counts", c10_determinism);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
