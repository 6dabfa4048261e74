#include "cotrap/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cotrap/analysis.hpp"
#include "cotrap/collapse.hpp"
#include "cotrap/constants.hpp"
#include "cotrap/dopri5.hpp"
#include "cotrap/errors.hpp"
#include "cotrap/oracle_suite.hpp"
#include "cotrap/output.hpp"

namespace cotrap {

using json = nlohmann::json;
using constants::two_pi;

namespace {

json cjson(Complex z) { return json::array({z.real(), z.imag()}); }

json modes_json(const ModeStructure& m) {
  return {{"ion_mass_kg", m.ion_mass},          {"flake_mass_kg", m.flake_mass},
          {"ion_charge_C", m.ion_charge},       {"flake_charge_C", m.flake_charge},
          {"omega1_rad_s", m.omega1},           {"mu", m.mu},
          {"xi", m.xi},                         {"beta", m.beta},
          {"d_m", m.d},                         {"d_approx_m", m.d_approx},
          {"z1_eq_m", m.z1_eq},                 {"z2_eq_m", m.z2_eq},
          {"b1i", m.b1i},                       {"b2i", m.b2i},
          {"b1o", m.b1o},                       {"b2o", m.b2o},
          {"omega_i_rad_s", m.omega_i},         {"omega_o_rad_s", m.omega_o},
          {"omega_i_hessian_rad_s", m.omega_i_hessian},
          {"omega_o_hessian_rad_s", m.omega_o_hessian},
          {"omega_o_over_omega_i", m.omega_o / m.omega_i},
          {"x0_i_m", m.x0_i},                   {"x0_o_m", m.x0_o},
          {"raman_wavenumber_1_m", m.raman_wavenumber},
          {"eta_i", m.eta_i},                   {"eta_o", m.eta_o}};
}

json feasibility_json(const FeasibilityReport& f) {
  return {{"pauthenier_Q_max_C", f.pauthenier_Q_max},
          {"flake_mass_from_area_kg", f.flake_mass},
          {"carbon_atoms", f.carbon_atoms},
          {"rabi_from_laser_rad_s", f.rabi_from_laser},
          {"G_upper_bound", f.G_upper_bound},
          {"alpha_o_upper_bound", f.alpha_o_upper_bound},
          {"charge_within_limit", f.charge_within_limit},
          {"violations", f.violations}};
}

json kick_json(const KickStatistics& k) {
  return {{"gamma_1_s", k.gamma},
          {"sigma_alpha", k.sigma_alpha},
          {"frame", k.frame == KickFrame::lab ? "lab" : "interaction"},
          {"warnings", k.warnings}};
}

json experiment_json(const Experiment& e) {
  return {{"t_split_s", e.t_split},
          {"sdf_rabi_rad_s", e.sdf.rabi},
          {"pa_strength_rad_s", e.calibration.strength},
          {"pa_gain_measured", e.calibration.gain},
          {"pa_frequency_rad_s", e.pa.frequency},
          {"pa_phase_rad", e.pa.phase}};
}

std::string out_dir(const RunConfig& c) { return c.output.dir; }

std::ostream& log(const CommandContext& ctx) {
  static std::ostringstream sink;
  if (ctx.log) return *ctx.log;
  sink.str("");
  return sink;
}

KickStatistics config_kicks(const RunConfig& c, const ModeStructure& m) {
  if (!c.collapse.enabled) return KickStatistics{};
  return kick_statistics({c.collapse.tau_e, c.collapse.sigma}, m, c.crystal.flake.mass,
                         c.crystal.flake_radius, c.collapse.frame);
}

Complex alpha_at_split(const ReferencePropagation& ref, double t_split) {
  std::size_t cur = 0;
  return ref.at(t_split, cur).alpha_up;
}

}  // namespace

// ---------------------------------------------------------------- experiment

ProtocolSchedule Experiment::schedule(int n_hold) const {
  return build_schedule(sdf, pa, modes, t_split, n_hold, inphase_model, hold_offset);
}

Experiment make_experiment(const RunConfig& c) {
  Experiment e;
  e.modes = config_modes(c);
  e.sdf = SDFDrive{c.drive.rabi, e.modes.omega_i, c.drive.sdf_phase};
  e.t_split = c.protocol.commensurate_split ? commensurate_time(c.protocol.t_split, e.modes)
                                            : c.protocol.t_split;
  e.inphase_model = c.drive.inphase_model;
  e.hold_offset = c.protocol.hold_offset;
  e.calibration = calibrate_pa(e.sdf, e.modes, e.t_split, c.protocol.gain, e.inphase_model);
  e.pa = pa_for_sdf(e.sdf, e.modes, e.calibration.strength);
  return e;
}

// ---------------------------------------------------------------- modes

int cmd_modes(const RunConfig& c, const CommandContext& ctx) {
  const ModeStructure m = config_modes(c);
  const FeasibilityReport f =
      feasibility(c.crystal.ion, c.crystal.flake_radius, c.crystal.flake,
                  {c.laser.g, c.laser.detuning, c.laser.spin_splitting}, m);
  json report = {{"schema", "cotrap.modes/1"}, {"modes", modes_json(m)}, {"feasibility", feasibility_json(f)}};
  RunOutput out(out_dir(c));
  out.write("modes.json", report.dump(2) + "\n");
  out.write_manifest("modes", serialize_config(c), c.ensemble.seed, json{{"modes", modes_json(m)}}.dump());

  auto& os = log(ctx);
  os << std::setprecision(6);
  os << "mode structure\n"
     << "  mu                 " << m.mu << "\n"
     << "  xi                 " << m.xi << "\n"
     << "  beta               " << m.beta << "\n"
     << "  d                  " << m.d * 1e6 << " um\n"
     << "  omega_i / 2pi      " << m.omega_i / two_pi << " Hz\n"
     << "  omega_o / 2pi      " << m.omega_o / two_pi << " Hz\n"
     << "  omega_o / omega_i  " << m.omega_o / m.omega_i << "\n"
     << "  b1i b2i            " << m.b1i << " " << m.b2i << "\n"
     << "  b1o b2o            " << m.b1o << " " << m.b2o << "\n"
     << "  x0_i               " << m.x0_i << " m\n"
     << "  eta_i eta_o        " << m.eta_i << " " << m.eta_o << "\n"
     << "feasibility\n"
     << "  Pauthenier Q_max   " << f.pauthenier_Q_max / constants::elementary_charge << " e\n"
     << "  carbon atoms       " << f.carbon_atoms << "\n"
     << "  Omega_R / 2pi      " << f.rabi_from_laser / two_pi << " Hz\n"
     << "  G bound            " << f.G_upper_bound << "\n"
     << "  alpha_o bound      " << f.alpha_o_upper_bound << "\n";
  for (const auto& v : f.violations) os << "  warning: " << v << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------- split

int cmd_split(const RunConfig& c, const CommandContext& ctx) {
  const Experiment e = make_experiment(c);
  const int n_hold = c.protocol.n_hold.front();
  const ProtocolSchedule s = e.schedule(n_hold);
  const ReferencePropagation ref(s);
  const double T = s.total_time();
  const int n = c.output.samples;

  CsvWriter csv;
  csv.comment("cotrap split trajectory; schema cotrap.split/1");
  csv.comment("t_s [s]; alpha, tau dimensionless mode units (interaction picture)");
  csv.comment("ellipse_* are Wigner-ellipse semi-axes in vacuum-noise units and the major-axis angle [rad]");
  csv.comment("flake_amplitude_m [m] real-space flake amplitude of the up branch");
  csv.header({"mode", "t_s", "alpha_up_re", "alpha_up_im", "alpha_down_re", "alpha_down_im",
              "tau_re", "tau_im", "squeeze_r", "ellipse_major", "ellipse_minor",
              "ellipse_angle_rad", "flake_amplitude_m"});
  auto emit = [&](const char* mode, double t, Complex au, Complex ad, Complex tau, double amp) {
    const SqueezeParam sp(tau);
    const double r = sp.r();
    const double angle = 0.5 * std::arg(tau) + 0.5 * constants::pi;
    csv.row({mode, CsvWriter::num(t), CsvWriter::num(au.real()), CsvWriter::num(au.imag()),
             CsvWriter::num(ad.real()), CsvWriter::num(ad.imag()), CsvWriter::num(tau.real()),
             CsvWriter::num(tau.imag()), CsvWriter::num(r), CsvWriter::num(std::exp(r)),
             CsvWriter::num(std::exp(-r)), CsvWriter::num(r > 0 ? angle : 0.0), CsvWriter::num(amp)});
  };
  double max_amp = 0.0, max_asym = 0.0;
  std::size_t cur = 0;
  for (int k = 0; k < n; ++k) {
    const double t = T * k / (n - 1);
    const auto p = ref.at(t, cur);
    const Complex tau = std::abs(p.P) > 0 ? -p.Q / std::conj(p.P) : Complex{};
    const double amp = real_space_amplitude(p.alpha_up, e.modes, Particle::flake);
    max_amp = std::max(max_amp, amp);
    max_asym = std::max(max_asym, std::abs(p.alpha_up + p.alpha_down));
    emit("in_phase", t, p.alpha_up, p.alpha_down, tau, amp);
  }
  // Out-of-phase mode: nearest accepted step of each branch on the same grid.
  const BranchRun ou = run_branch(s, Mode::out_of_phase, Spin::up, true);
  const BranchRun od = run_branch(s, Mode::out_of_phase, Spin::down, true);
  {
    std::size_t iu = 0, id = 0;
    for (int k = 0; k < n; ++k) {
      const double t = T * k / (n - 1);
      while (iu + 1 < ou.samples.size() && ou.samples[iu + 1].state.t <= t) ++iu;
      while (id + 1 < od.samples.size() && od.samples[id + 1].state.t <= t) ++id;
      const auto& su = ou.samples[iu].state;
      const auto& sd = od.samples[id].state;
      emit("out_of_phase", su.t, su.alpha, sd.alpha, su.tau.tau(), 0.0);
    }
  }

  const GaussianPropagator& iu = ref.final_branch(Spin::up);
  const GaussianPropagator& id = ref.final_branch(Spin::down);
  const Complex alpha_f = alpha_at_split(ref, e.t_split);
  const Complex alpha_sdf{0.5 * e.sdf.rabi * e.modes.eta_i * e.t_split, 0.0};
  const double G = c.protocol.gain;
  const double gain_factor = G == 1.0 ? 1.0 : (G - 1.0) / std::log(G);

  auto relative_visibility = [](const GaussianPropagator& up, const GaussianPropagator& down, double nbar) {
    const GaussianPropagator rel = multiply(inverse(down), up);
    return general_gaussian_visibility(rel.alpha, rel.tau.zeta(), -rel.chi, {nbar}).V;
  };
  const double Vi = relative_visibility(iu, id, c.thermal.nbar_inphase);
  const double Vo = relative_visibility(ou.final_state, od.final_state, c.thermal.nbar_outofphase);

  json summary = {
      {"schema", "cotrap.split_summary/1"},
      {"n_hold", n_hold},
      {"t_hold_s", s.t_hold},
      {"total_time_s", T},
      {"alpha_sdf", std::abs(alpha_sdf)},
      {"alpha_at_split", cjson(alpha_f)},
      {"alpha_f_over_alpha_sdf", std::abs(alpha_f) / std::abs(alpha_sdf)},
      {"gain_factor_expected", gain_factor},
      {"max_flake_amplitude_m", max_amp},
      {"max_spin_asymmetry", max_asym},
      {"in_phase", {{"final_alpha_up", cjson(iu.alpha)}, {"final_alpha_down", cjson(id.alpha)},
                    {"final_tau_up", cjson(iu.tau.tau())}, {"final_tau_down", cjson(id.tau.tau())},
                    {"phase_difference_rad", iu.phi - id.phi}, {"visibility", Vi}}},
      {"out_of_phase", {{"final_alpha_up", cjson(ou.final_state.alpha)},
                        {"final_alpha_down", cjson(od.final_state.alpha)},
                        {"final_tau", cjson(ou.final_state.tau.tau())},
                        {"visibility", Vo}}},
      {"visibility_total", Vi * Vo}};

  RunOutput out(out_dir(c));
  out.write("split.csv", csv.str());
  out.write("split_summary.json", summary.dump(2) + "\n");
  out.write_manifest("split", serialize_config(c), c.ensemble.seed, experiment_json(e).dump());

  auto& os = log(ctx);
  os << std::setprecision(6) << "split/hold/recombine (n_hold " << n_hold << ", t_s " << e.t_split << " s)\n"
     << "  Omega_PA           " << e.calibration.strength << " rad/s (G " << e.calibration.gain << ")\n"
     << "  |alpha(t_s)|       " << std::abs(alpha_f) << " (" << std::abs(alpha_f) / std::abs(alpha_sdf)
     << " x alpha_SDF; expected " << gain_factor << ")\n"
     << "  max flake ampl.    " << max_amp * 1e10 << " A\n"
     << "  final |alpha| i    " << std::abs(iu.alpha) << " / " << std::abs(id.alpha) << "\n"
     << "  final |alpha| o    " << std::abs(ou.final_state.alpha) << " / " << std::abs(od.final_state.alpha) << "\n"
     << "  V_i V_o V          " << Vi << " " << Vo << " " << Vi * Vo << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------- collapse-mc

int cmd_collapse_mc(const RunConfig& c, const CommandContext& ctx) {
  const Experiment e = make_experiment(c);
  const KickStatistics k = config_kicks(c, e.modes);
  TrajectoryOptions topt;
  topt.sampling = c.collapse.sampling;
  topt.bernoulli_dt = c.collapse.bernoulli_dt;

  CsvWriter csv;
  csv.comment("cotrap collapse Monte Carlo; schema cotrap.visibility/1");
  csv.comment("t_int_s [s] hold time; V dimensionless; phases [rad]; V_analytic_rel = exp(-Gamma t_int)");
  csv.header({"n_hold", "t_int_s", "trajectories", "V", "V_err", "mean_phase_rad", "phase_std_rad",
              "mean_jumps", "V_analytic_rel"});
  std::string jsonl;
  std::vector<double> ts, Vs, errs;
  Complex alpha_f;
  for (int nh : c.protocol.n_hold) {
    const ProtocolSchedule s = e.schedule(nh);
    const ReferencePropagation ref(s);
    alpha_f = alpha_at_split(ref, e.t_split);
    const DecayPrediction pred = analytic_decay(k, alpha_f, s.t_hold);
    const auto records = run_ensemble(ref, k, c.ensemble.seed, c.ensemble.trajectories, ctx.workers, topt);
    const VisibilityResult v = ensemble_visibility(records, c.ensemble.bootstrap);
    double jumps = 0.0;
    for (const auto& r : records) jumps += static_cast<double>(r.jump_count);
    jumps /= std::max<std::size_t>(1, records.size());
    csv.row({CsvWriter::num(std::int64_t{nh}), CsvWriter::num(s.t_hold),
             CsvWriter::num(static_cast<std::int64_t>(records.size())), CsvWriter::num(v.V),
             CsvWriter::num(v.V_err), CsvWriter::num(v.mean_phase), CsvWriter::num(v.phase_std),
             CsvWriter::num(jumps), CsvWriter::num(pred.V)});
    ts.push_back(s.t_hold);
    Vs.push_back(v.V);
    errs.push_back(v.V_err);
    if (c.ensemble.trajectory_log) {
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        jsonl += json{{"n_hold", nh}, {"index", i}, {"seed", r.seed}, {"jump_count", r.jump_count},
                      {"phase_difference", r.phase_difference},
                      {"final_alpha_up", cjson(r.final_up.alpha)},
                      {"final_alpha_down", cjson(r.final_down.alpha)}}
                     .dump() +
                 "\n";
      }
    }
    log(ctx) << "  n_hold " << nh << ": V " << v.V << " +- " << v.V_err << ", phase std "
             << v.phase_std << " rad\n";
  }

  const DecayPrediction pred = analytic_decay(k, alpha_f, 0.0);
  json fit = nullptr;
  bool fittable = ts.size() >= 2 && ts.front() != ts.back();
  for (double V : Vs) fittable = fittable && V > 0.0;
  if (fittable) {
    const DecayFit f = fit_decay(ts, Vs, errs);
    fit = {{"Gamma_1_s", f.Gamma}, {"Gamma_err_1_s", f.Gamma_err}, {"ci95", {f.ci_low, f.ci_high}},
           {"V0", f.V0}, {"chi2", f.chi2},
           {"ratio_to_analytic", pred.Gamma > 0 ? f.Gamma / pred.Gamma : 0.0}};
  }
  json summary = {{"schema", "cotrap.collapse_summary/1"},
                  {"collapse_enabled", c.collapse.enabled},
                  {"kicks", kick_json(k)},
                  {"alpha_at_split", cjson(alpha_f)},
                  {"analytic", {{"sigma0", pred.sigma0}, {"Gamma_1_s", pred.Gamma},
                                {"sigma0_literal", pred.sigma0_literal},
                                {"Gamma_literal_1_s", pred.Gamma_literal}}},
                  {"fit", fit},
                  {"master_seed", c.ensemble.seed},
                  {"trajectories_per_point", c.ensemble.trajectories}};

  RunOutput out(out_dir(c));
  out.write("visibility.csv", csv.str());
  out.write("collapse_summary.json", summary.dump(2) + "\n");
  if (c.ensemble.trajectory_log) out.write("trajectories.jsonl", jsonl);
  json derived = experiment_json(e);
  derived["kicks"] = kick_json(k);
  out.write_manifest("collapse-mc", serialize_config(c), c.ensemble.seed, derived.dump());
  if (!fit.is_null())
    log(ctx) << "  fitted Gamma " << fit["Gamma_1_s"].get<double>() << " 1/s, analytic "
             << pred.Gamma << " 1/s\n";
  return exit_ok;
}

// ---------------------------------------------------------------- exclusion

int cmd_exclusion(const RunConfig& c, const CommandContext& ctx) {
  const Experiment e = make_experiment(c);
  const ReferencePropagation ref(e.schedule(0));
  ExclusionGeometry g;
  g.modes = e.modes;
  g.flake_mass = c.crystal.flake.mass;
  g.flake_radius = c.crystal.flake_radius;
  g.alpha_f = alpha_at_split(ref, e.t_split);
  g.t_split = e.t_split;
  g.delta_x = c.exclusion.delta_x;
  g.frame = c.collapse.frame;
  const auto& x = c.exclusion;
  const ExclusionRegion r = exclusion_region(x.gamma_bound, g, log_grid(x.sigma_min, x.sigma_max, x.sigma_points),
                                             log_grid(x.tau_min, x.tau_max, x.tau_points));
  CsvWriter csv;
  csv.comment("cotrap exclusion grid; schema cotrap.exclusion/1");
  csv.comment("sigma_m [m], tau_e_s [s], Gamma_1_s [1/s], t_split_used_s [s], excluded 0/1");
  csv.comment("Gamma_bound " + CsvWriter::num(r.Gamma_bound) + " 1/s; macroscopicity " +
              CsvWriter::num(r.macroscopicity) + " (f=1/e, t=1/Gamma_bound)");
  for (const auto& p : r.references)
    csv.comment(p.label + " sigma=" + CsvWriter::num(p.sigma) + " m tau_e=" + CsvWriter::num(p.tau_e) +
                " s Gamma=" + CsvWriter::num(p.Gamma) + " 1/s excluded=" + (p.excluded ? "1" : "0"));
  csv.header({"sigma_m", "tau_e_s", "Gamma_1_s", "t_split_used_s", "excluded"});
  for (std::size_t i = 0; i < r.sigma.size(); ++i)
    for (std::size_t j = 0; j < r.tau_e.size(); ++j)
      csv.row({CsvWriter::num(r.sigma[i]), CsvWriter::num(r.tau_e[j]), CsvWriter::num(r.Gamma[i][j]),
               CsvWriter::num(r.t_used[i][j]), r.excluded[i][j] ? "1" : "0"});
  json refs = json::array();
  for (const auto& p : r.references)
    refs.push_back({{"label", p.label}, {"sigma_m", p.sigma}, {"tau_e_s", p.tau_e},
                    {"Gamma_1_s", p.Gamma}, {"excluded", p.excluded}});
  std::size_t n_ex = 0;
  for (const auto& row : r.excluded)
    for (char v : row) n_ex += v;
  json summary = {{"schema", "cotrap.exclusion_summary/1"},
                  {"Gamma_bound_1_s", std::isfinite(r.Gamma_bound) ? json(r.Gamma_bound) : json("inf")},
                  {"macroscopicity", r.macroscopicity},
                  {"macroscopicity_convention", "f = 1/e, t = 1/Gamma_bound"},
                  {"alpha_at_split", cjson(g.alpha_f)},
                  {"excluded_points", n_ex},
                  {"grid_points", r.sigma.size() * r.tau_e.size()},
                  {"references", refs}};
  RunOutput out(out_dir(c));
  out.write("exclusion.csv", csv.str());
  out.write("exclusion_summary.json", summary.dump(2) + "\n");
  out.write_manifest("exclusion", serialize_config(c), c.ensemble.seed, experiment_json(e).dump());
  auto& os = log(ctx);
  os << "exclusion: " << n_ex << " of " << r.sigma.size() * r.tau_e.size()
     << " grid points excluded; macroscopicity " << r.macroscopicity << "\n";
  for (const auto& p : r.references)
    os << "  " << p.label << ": Gamma " << p.Gamma << " 1/s, " << (p.excluded ? "excluded" : "allowed") << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------- budget

int cmd_budget(const RunConfig& c, const CommandContext& ctx) {
  const ModeStructure m = config_modes(c);
  double dx = c.budget_delta_x;
  json derived = {{"modes", modes_json(m)}};
  if (!(dx > 0.0)) {
    const Experiment e = make_experiment(c);
    const ReferencePropagation ref(e.schedule(0));
    dx = 2.0 * real_space_amplitude(alpha_at_split(ref, e.t_split), m, Particle::flake);
    derived = experiment_json(e);
  }
  derived["delta_x_m"] = dx;
  const DecoherenceBudget b = decoherence_budget(c.environment, m, c.crystal.flake_radius, dx, c.crystal.flake.charge);
  json entries = json::array();
  for (const auto& en : b.entries)
    entries.push_back({{"name", en.name}, {"value", en.value}, {"unit", en.unit},
                       {"threshold", en.threshold}, {"pass", en.pass}, {"note", en.note}});
  json report = {{"schema", "cotrap.budget/1"},
                 {"delta_x_m", dx},
                 {"gas_rate_1_s", b.gas_rate},
                 {"pressure_for_target_Pa", b.pressure_for_target},
                 {"debroglie_length_m", b.debroglie_length},
                 {"debroglie_threshold_K", b.debroglie_threshold},
                 {"photon_threshold_K", b.photon_threshold},
                 {"shockley_ramo", {{"velocity_m_s", b.sr_velocity}, {"current_A", b.sr_current},
                                    {"figure", b.sr_figure}}},
                 {"total_rate_1_s", b.total_rate},
                 {"target_rate_1_s", {c.environment.target_rate_min, c.environment.target_rate_max}},
                 {"pass", b.pass},
                 {"entries", entries},
                 {"flags", b.flags}};
  RunOutput out(out_dir(c));
  out.write("budget.json", report.dump(2) + "\n");
  out.write_manifest("budget", serialize_config(c), c.ensemble.seed, derived.dump());
  auto& os = log(ctx);
  os << std::setprecision(4) << "decoherence budget\n";
  for (const auto& en : b.entries)
    os << "  " << std::left << std::setw(22) << en.name << std::setw(12) << en.value << en.unit << "  "
       << (en.pass ? "ok" : "FAIL") << "  " << en.note << "\n";
  for (const auto& f : b.flags) os << "  flag: " << f << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------- oracle-check

int cmd_oracle_check(const RunConfig& c, const CommandContext& ctx) {
  OracleSuiteOptions o;
  o.algebra_draws = c.oracle.algebra_draws;
  o.algebra_N = c.oracle.algebra_N;
  o.propagation_drives = c.oracle.propagation_drives;
  o.propagation_N = c.oracle.propagation_N;
  o.seed = c.oracle.seed;
  o.inject_fault = ctx.inject_fault;
  const auto checks = run_oracle_suite(o);
  bool ok = true;
  json arr = json::array();
  auto& os = log(ctx);
  for (const auto& ch : checks) {
    ok = ok && ch.pass;
    arr.push_back({{"name", ch.name}, {"max_error", ch.max_error}, {"tolerance", ch.tolerance},
                   {"cases", ch.cases}, {"pass", ch.pass}, {"detail", ch.detail}});
    os << (ch.pass ? "PASS " : "FAIL ") << std::left << std::setw(22) << ch.name << " max error "
       << std::setprecision(3) << ch.max_error << " (tol " << ch.tolerance << ") " << ch.detail << "\n";
  }
  json report = {{"schema", "cotrap.oracle_report/1"}, {"pass", ok}, {"checks", arr},
                 {"injected_fault", ctx.inject_fault}};
  RunOutput out(out_dir(c));
  out.write("oracle_report.json", report.dump(2) + "\n");
  out.write_manifest("oracle-check", serialize_config(c), c.oracle.seed, json::object().dump());
  return ok ? exit_ok : exit_oracle;
}

// ---------------------------------------------------------------- dispatch

int run_command(const std::string& name, const RunConfig& c, const CommandContext& ctx) {
  std::ostream* err = ctx.log ? ctx.log : nullptr;
  auto report = [&](const char* kind, const std::string& what) {
    if (err) *err << "error (" << kind << "): " << what << "\n";
  };
  try {
    if (name == "modes") return cmd_modes(c, ctx);
    if (name == "split") return cmd_split(c, ctx);
    if (name == "collapse-mc") return cmd_collapse_mc(c, ctx);
    if (name == "exclusion") return cmd_exclusion(c, ctx);
    if (name == "budget") return cmd_budget(c, ctx);
    if (name == "oracle-check") return cmd_oracle_check(c, ctx);
    report("usage", "unknown command '" + name + "'");
    return exit_other;
  } catch (const ConfigError& e) {
    report("config", e.what());
    return exit_config;
  } catch (const ParameterError& e) {
    report("config", e.what());
    return exit_config;
  } catch (const PhysicsError& e) {
    report("physics", e.what());
    return exit_physics;
  } catch (const IntegrationError& e) {
    report("physics", e.what());
    return exit_physics;
  } catch (const std::exception& e) {
    report("other", e.what());
    return exit_other;
  }
}

}  // namespace cotrap
