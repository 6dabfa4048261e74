#include "cotrap/drives.hpp"

#include <cmath>
#include <json.hpp>

#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"

namespace cotrap {

using json = nlohmann::json;

double SDFDrive::phase_down() const { return phase_up + constants::pi; }

Waveform sdf_inphase_drive(const SDFDrive& sdf, const ModeStructure& modes, Spin spin) {
  Waveform w;
  const double amp = sdf.rabi * modes.eta_i;
  if (amp != 0.0) w.tones.push_back({amp, sdf.detuning, sdf.phase(spin)});
  return w;
}

Waveform pa_inphase_drive(const PADrive& pa) {
  if (pa.strength < 0.0) throw ParameterError("PA strength must be >= 0");
  Waveform w;
  if (pa.strength != 0.0) w.tones.push_back({pa.strength, pa.frequency, pa.phase});
  return w;
}

double eta_o_pa(const PADrive& pa, const SDFDrive& sdf, const ModeStructure& modes) {
  if (sdf.rabi == 0.0) return 0.0;
  const double k = std::sqrt(2.0 * modes.ion_mass * modes.omega_i * modes.omega_i /
                             (constants::hbar * modes.omega_o));
  return (pa.strength / sdf.rabi) * modes.b1o * modes.z1_eq * k;
}

OutOfPhaseDrive outofphase_drives(const SDFDrive& sdf, const PADrive& pa,
                                  const ModeStructure& modes, Spin spin) {
  OutOfPhaseDrive d;
  const double phi = sdf.phase(spin);
  const double a1 = sdf.rabi * modes.eta_o;
  if (a1 != 0.0) d.f.tones.push_back({a1, sdf.detuning, phi});
  // Trap-drive force; spin independent.
  const double a2 = sdf.rabi * eta_o_pa(pa, sdf, modes);
  if (a2 != 0.0) d.f.tones.push_back({a2, pa.frequency, pa.phase});
  // The Lamb-Dicke expansion carries -(1/2) Omega_R eta_o^2 cos(.) X^2; the
  // generic Hamiltonian carries (1/2) g X^2, so g = -Omega_R eta_o^2 cos(.).
  // cos(x) = sin(x + pi/2): phase shifted by -pi/2.
  const double a3 = -sdf.rabi * modes.eta_o * modes.eta_o;
  if (a3 != 0.0) d.g.tones.push_back({a3, sdf.detuning, phi - 0.5 * constants::pi});
  return d;
}

PADrive pa_for_sdf(const SDFDrive& sdf, const ModeStructure& modes, double strength) {
  PADrive pa;
  pa.strength = strength;
  pa.frequency = 2.0 * modes.omega_i;
  pa.phase = 2.0 * sdf.phase_up;
  return pa;
}

std::array<double, 6> ProtocolSchedule::boundaries() const {
  const double h = 0.5 * t_split;
  return {0.0, h, t_split, t_split + t_hold, t_split + t_hold + h, 2.0 * t_split + t_hold};
}

ProtocolSchedule build_schedule(const SDFDrive& sdf, const PADrive& pa, const ModeStructure& modes,
                                double t_split, int n_hold_periods,
                                PropagationModel inphase_model, double hold_offset) {
  if (!(t_split > 0.0) || !std::isfinite(t_split))
    throw ParameterError("build_schedule: t_split must be positive and finite");
  if (n_hold_periods < 0) throw ParameterError("build_schedule: n_hold_periods must be >= 0");
  if (!(modes.omega_i > 0.0)) throw ParameterError("build_schedule: modes not populated");

  ProtocolSchedule s;
  s.t_split = t_split;
  s.n_hold_periods = n_hold_periods;
  s.t_hold = n_hold_periods * constants::two_pi / modes.omega_i + hold_offset;
  if (!(s.t_hold >= 0.0)) throw ParameterError("build_schedule: negative hold time");
  s.omega_i = modes.omega_i;
  s.omega_o = modes.omega_o;
  s.sdf = sdf;
  s.pa = pa;
  s.inphase_model = inphase_model;

  const auto b = s.boundaries();
  PADrive pa_a = pa, pa_b = pa;
  pa_b.phase = pa.phase + constants::pi;
  SDFDrive sdf_rev = sdf;
  sdf_rev.phase_up = sdf.phase_up + constants::pi;

  for (Spin spin : {Spin::up, Spin::down}) {
    const int si = static_cast<int>(spin);
    auto& in = s.drives[0][si];
    auto& out = s.drives[1][si];
    struct Piece {
      double t0, t1;
      const SDFDrive* sdf;
      const PADrive* pa;
    };
    const PADrive none{};
    const SDFDrive off{};
    const Piece pieces[5] = {{b[0], b[1], &sdf, &pa_a},
                             {b[1], b[2], &sdf, &pa_b},
                             {b[2], b[3], &off, &none},
                             {b[3], b[4], &sdf_rev, &pa_a},
                             {b[4], b[5], &sdf_rev, &pa_b}};
    for (const auto& p : pieces) {
      DriveSegment seg_i{p.t0, p.t1, {}, {}};
      seg_i.f = sdf_inphase_drive(*p.sdf, modes, spin);
      seg_i.g = pa_inphase_drive(*p.pa);
      in.segments.push_back(seg_i);
      DriveSegment seg_o{p.t0, p.t1, {}, {}};
      const OutOfPhaseDrive od = outofphase_drives(*p.sdf, *p.pa, modes, spin);
      seg_o.f = od.f;
      seg_o.g = od.g;
      out.segments.push_back(seg_o);
    }
  }
  return s;
}

double commensurate_time(double t, const ModeStructure& modes) {
  const double period = constants::two_pi / modes.omega_i;
  return std::max(1.0, std::round(t / period)) * period;
}

double real_space_amplitude(Complex alpha, const ModeStructure& modes, Particle which) {
  const double b = which == Particle::flake ? modes.b2i : modes.b1i;
  return 2.0 * std::abs(alpha) * b * modes.x0_i;
}

namespace {

double half_gain(double strength, const SDFDrive& sdf, const ModeStructure& modes, double t_split,
                 PropagationModel model) {
  DriveFunction d;
  DriveSegment seg{0.0, 0.5 * t_split, {}, {}};
  seg.g = pa_inphase_drive(pa_for_sdf(sdf, modes, strength));
  d.segments.push_back(seg);
  GaussianPropagator u;
  u.omega = modes.omega_i;
  PropagateOptions opt;
  opt.model = model;
  const GaussianPropagator r = propagate(u, d, opt);
  return std::exp(r.tau.r());
}

}  // namespace

PACalibration calibrate_pa(const SDFDrive& sdf, const ModeStructure& modes, double t_split,
                           double G_target, PropagationModel model, double rel_tol) {
  if (!(G_target >= 1.0)) throw ParameterError("calibrate_pa: target gain must be >= 1");
  PACalibration c;
  if (G_target == 1.0) {
    c.gain = 1.0;
    return c;
  }
  // Rotating-wave estimate: r = Omega t_s / 4.
  double hi = 4.0 * std::log(G_target) / t_split;
  double lo = 0.0;
  for (int k = 0; k < 60; ++k) {
    double g = 0.0;
    try {
      g = half_gain(hi, sdf, modes, t_split, model);
    } catch (const PhysicsError&) {
      g = INFINITY;
    }
    if (g >= G_target) break;
    lo = hi;
    hi *= 2.0;
    if (k == 59) throw PhysicsError("calibrate_pa: target gain unreachable", 0.5 * t_split);
  }
  for (c.iterations = 0; c.iterations < 200; ++c.iterations) {
    const double mid = 0.5 * (lo + hi);
    double g;
    try {
      g = half_gain(mid, sdf, modes, t_split, model);
    } catch (const PhysicsError&) {
      g = INFINITY;
    }
    if (g >= G_target)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= rel_tol * 1e-3 * hi) break;
  }
  c.strength = 0.5 * (lo + hi);
  c.gain = half_gain(c.strength, sdf, modes, t_split, model);
  return c;
}

BranchRun run_branch(const ProtocolSchedule& s, Mode m, Spin spin, bool keep_samples,
                     const StepControl& step) {
  BranchRun run;
  GaussianPropagator u;
  u.omega = s.omega(m);
  PropagateOptions opt;
  opt.step = step;
  opt.model = s.model(m);
  if (keep_samples) opt.observer = [&run](const PropagationSample& p) { run.samples.push_back(p); };
  run.final_state = propagate(u, s.drive(m, spin), opt);
  return run;
}

// ---------------------------------------------------------------- serialization

namespace {

const char* model_name(PropagationModel m) {
  return m == PropagationModel::exact ? "exact" : "rotating_wave";
}
PropagationModel model_from(const std::string& s) {
  if (s == "exact") return PropagationModel::exact;
  if (s == "rotating_wave") return PropagationModel::rotating_wave;
  throw ParameterError("unknown propagation model: " + s);
}

json waveform_json(const Waveform& w) {
  json tones = json::array();
  for (const auto& t : w.tones)
    tones.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
  return {{"offset", w.offset}, {"tones", tones}};
}
Waveform waveform_from(const json& j) {
  Waveform w;
  w.offset = j.at("offset").get<double>();
  for (const auto& t : j.at("tones"))
    w.tones.push_back({t.at("amplitude").get<double>(), t.at("frequency").get<double>(),
                       t.at("phase").get<double>()});
  return w;
}
json drive_json(const DriveFunction& d) {
  json segs = json::array();
  for (const auto& s : d.segments)
    segs.push_back({{"t_start", s.t_start},
                    {"t_end", s.t_end},
                    {"f", waveform_json(s.f)},
                    {"g", waveform_json(s.g)}});
  return segs;
}
DriveFunction drive_from(const json& j) {
  DriveFunction d;
  for (const auto& s : j)
    d.segments.push_back({s.at("t_start").get<double>(), s.at("t_end").get<double>(),
                          waveform_from(s.at("f")), waveform_from(s.at("g"))});
  return d;
}

}  // namespace

std::string schedule_to_json(const ProtocolSchedule& s) {
  json j;
  j["schema"] = "cotrap.schedule/1";
  j["t_split_s"] = s.t_split;
  j["t_hold_s"] = s.t_hold;
  j["n_hold_periods"] = s.n_hold_periods;
  j["omega_i_rad_s"] = s.omega_i;
  j["omega_o_rad_s"] = s.omega_o;
  j["sdf"] = {{"rabi", s.sdf.rabi}, {"detuning", s.sdf.detuning}, {"phase_up", s.sdf.phase_up}};
  j["pa"] = {{"strength", s.pa.strength}, {"frequency", s.pa.frequency}, {"phase", s.pa.phase}};
  j["inphase_model"] = model_name(s.inphase_model);
  j["outofphase_model"] = model_name(s.outofphase_model);
  const char* modes[2] = {"in_phase", "out_of_phase"};
  const char* spins[2] = {"up", "down"};
  for (int m = 0; m < 2; ++m)
    for (int sp = 0; sp < 2; ++sp) j["drives"][modes[m]][spins[sp]] = drive_json(s.drives[m][sp]);
  return j.dump(2);
}

ProtocolSchedule schedule_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema").get<std::string>() != "cotrap.schedule/1")
    throw ParameterError("unsupported schedule schema");
  ProtocolSchedule s;
  s.t_split = j.at("t_split_s").get<double>();
  s.t_hold = j.at("t_hold_s").get<double>();
  s.n_hold_periods = j.at("n_hold_periods").get<int>();
  s.omega_i = j.at("omega_i_rad_s").get<double>();
  s.omega_o = j.at("omega_o_rad_s").get<double>();
  s.sdf = {j["sdf"].at("rabi").get<double>(), j["sdf"].at("detuning").get<double>(),
           j["sdf"].at("phase_up").get<double>()};
  s.pa = {j["pa"].at("strength").get<double>(), j["pa"].at("frequency").get<double>(),
          j["pa"].at("phase").get<double>()};
  s.inphase_model = model_from(j.at("inphase_model").get<std::string>());
  s.outofphase_model = model_from(j.at("outofphase_model").get<std::string>());
  const char* modes[2] = {"in_phase", "out_of_phase"};
  const char* spins[2] = {"up", "down"};
  for (int m = 0; m < 2; ++m)
    for (int sp = 0; sp < 2; ++sp) s.drives[m][sp] = drive_from(j.at("drives").at(modes[m]).at(spins[sp]));
  return s;
}

}  // namespace cotrap
