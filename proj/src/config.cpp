#include "cotrap/config.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"

namespace cotrap {

using json = nlohmann::json;
using namespace constants;

ConfigError::ConfigError(const std::string& path, int line, const std::string& what)
    : std::runtime_error("config " + (path.empty() ? std::string("<root>") : path) +
                         (line > 0 ? " (line " + std::to_string(line) + ")" : std::string()) +
                         ": " + what),
      path_(path),
      line_(line) {}

// ---------------------------------------------------------------- units

namespace {

struct UnitTable {
  const char* canonical;
  std::map<std::string, double> scale;
};

const UnitTable& table(Dimension d) {
  static const std::map<Dimension, UnitTable> t = {
      {Dimension::none, {"", {{"", 1.0}}}},
      {Dimension::mass, {"kg", {{"kg", 1.0}, {"g", 1e-3}, {"u", atomic_mass_unit}, {"amu", atomic_mass_unit}}}},
      {Dimension::charge, {"C", {{"C", 1.0}, {"e", elementary_charge}}}},
      {Dimension::length,
       {"m", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"\xC2\xB5m", 1e-6},
              {"\xCE\xBCm", 1e-6}, {"nm", 1e-9}, {"pm", 1e-12}, {"A", 1e-10}, {"\xC3\x85", 1e-10}}}},
      {Dimension::time,
       {"s", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"\xC2\xB5s", 1e-6}, {"\xCE\xBCs", 1e-6},
              {"ns", 1e-9}}}},
      {Dimension::angular_frequency,
       {"rad/s", {{"rad/s", 1.0}, {"krad/s", 1e3}, {"Mrad/s", 1e6}, {"Hz", two_pi},
                  {"kHz", two_pi * 1e3}, {"MHz", two_pi * 1e6}, {"GHz", two_pi * 1e9}}}},
      {Dimension::rate, {"1/s", {{"1/s", 1.0}, {"s^-1", 1.0}, {"1/ms", 1e3}, {"ms^-1", 1e3}}}},
      {Dimension::pressure, {"Pa", {{"Pa", 1.0}, {"mbar", 100.0}, {"Torr", 101325.0 / 760.0}}}},
      {Dimension::temperature, {"K", {{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}}}},
      {Dimension::inductance, {"H", {{"H", 1.0}, {"mH", 1e-3}, {"uH", 1e-6}, {"nH", 1e-9}}}},
      {Dimension::wavenumber, {"1/m", {{"1/m", 1.0}, {"1/um", 1e6}, {"1/nm", 1e9}}}},
      {Dimension::angle, {"rad", {{"rad", 1.0}, {"deg", pi / 180.0}}}},
  };
  return t.at(d);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

double parse_quantity(const std::string& text, Dimension d) {
  const std::string s = trim(text);
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) throw ParameterError("'" + text + "' does not start with a number");
  const std::string unit = trim(std::string(end));
  const UnitTable& t = table(d);
  const auto it = t.scale.find(unit);
  if (it == t.scale.end()) {
    std::string allowed;
    for (const auto& [u, _] : t.scale) allowed += (allowed.empty() ? "" : ", ") + (u.empty() ? "<none>" : u);
    throw ParameterError("unit '" + unit + "' in '" + text + "' is not one of: " + allowed);
  }
  return v * it->second;
}

std::string format_quantity(double value, Dimension d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  const std::string u = table(d).canonical;
  return u.empty() ? std::string(buf) : std::string(buf) + " " + u;
}

// ---------------------------------------------------------------- reader

namespace {

int line_at(const std::string& text, std::size_t pos) {
  int line = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

/// Walks a JSON object, remembering which keys were read so leftovers can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path, const std::string& text, std::size_t pos)
      : j_(j), path_(std::move(path)), text_(text), pos_(pos) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string p = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
    throw ConfigError(p, key.empty() ? line_at(text_, pos_) : line_at(text_, locate(key)), what);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double quantity(const std::string& key, Dimension d, double def, bool required = false) {
    if (!has(key)) {
      if (required) fail(key, "missing required key");
      return def;
    }
    const json& v = raw(key);
    if (v.is_number()) {
      if (d != Dimension::none) fail(key, "missing unit suffix (expected e.g. \"1 " +
                                              std::string(table(d).canonical) + "\")");
      return v.get<double>();
    }
    if (!v.is_string()) fail(key, "expected a quantity string");
    try {
      return parse_quantity(v.get<std::string>(), d);
    } catch (const ParameterError& e) {
      fail(key, e.what());
    }
  }

  template <class T>
  T integer(const std::string& key, T def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return v.get<T>();
      if (v.get<long long>() < 0) fail(key, "expected a non-negative integer");
    }
    return v.get<T>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  template <class E>
  E choice(const std::string& key, E def, const std::map<std::string, E>& options) {
    if (!has(key)) return def;
    const std::string s = string(key, "");
    const auto it = options.find(s);
    if (it == options.end()) {
      std::string allowed;
      for (const auto& [k, _] : options) allowed += (allowed.empty() ? "" : ", ") + k;
      fail(key, "'" + s + "' is not one of: " + allowed);
    }
    return it->second;
  }

  Reader child(const std::string& key) {
    const json& v = raw(key);
    const std::string p = path_.empty() ? key : path_ + "." + key;
    if (!v.is_object()) throw ConfigError(p, line_at(text_, locate(key)), "expected an object");
    return Reader(v, p, text_, locate(key));
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) fail(k, "unknown key");
  }

  std::size_t locate(const std::string& key) const {
    const std::size_t p = text_.find("\"" + key + "\"", pos_);
    return p == std::string::npos ? pos_ : p;
  }

 private:
  const json& j_;
  std::string path_;
  const std::string& text_;
  std::size_t pos_;
  std::set<std::string> seen_;
};

const std::map<std::string, PropagationModel> kModels = {
    {"exact", PropagationModel::exact}, {"rotating_wave", PropagationModel::rotating_wave}};
const std::map<std::string, KickFrame> kFrames = {{"lab", KickFrame::lab},
                                                  {"interaction", KickFrame::interaction}};
const std::map<std::string, JumpSampling> kSampling = {{"exponential", JumpSampling::exponential},
                                                       {"bernoulli", JumpSampling::bernoulli}};

template <class E>
std::string name_of(E v, const std::map<std::string, E>& options) {
  for (const auto& [k, e] : options)
    if (e == v) return k;
  return "";
}

RunConfig defaults() {
  RunConfig c;
  c.crystal.ion = {174.0 * atomic_mass_unit, elementary_charge, "ion"};
  c.crystal.flake = {1e9 * atomic_mass_unit, 430.0 * elementary_charge, "flake"};
  c.crystal.flake_radius = 0.8e-6;
  c.crystal.omega1 = two_pi * 1e6;
  c.crystal.endcap_distance = 1.1e-3;
  c.crystal.eta_inphase = 2e-4;
  c.laser = {two_pi * 1e9, two_pi * 1e11, two_pi * 12.6e9};
  c.drive.rabi = two_pi * 5e6;
  c.protocol.t_split = 1e-3;
  c.protocol.gain = 10.0;
  c.collapse.tau_e = 1e16;
  c.collapse.sigma = 1e-7;
  c.collapse.bernoulli_dt = 1e-10;
  c.environment.pressure = 1e-14;
  c.environment.gas_temperature = 293.0;
  c.environment.gas_molecule_mass = 29.0 * atomic_mass_unit;
  c.environment.circuit_inductance = 4e-6;
  c.environment.circuit_omega = two_pi * 1e6;
  c.environment.circuit_temperature = 1.0;
  c.environment.endcap_distance = 1.1e-3;
  return c;
}

RunConfig parse_root(Reader& r) {
  RunConfig c = defaults();
  const std::string schema = r.string("schema", "cotrap.config/1");
  if (schema != "cotrap.config/1") r.fail("schema", "unsupported schema '" + schema + "'");

  if (r.has("crystal")) {
    Reader s = r.child("crystal");
    auto& k = c.crystal;
    k.ion.mass = s.quantity("ion_mass", Dimension::mass, k.ion.mass);
    k.ion.charge = s.quantity("ion_charge", Dimension::charge, k.ion.charge);
    k.ion.label = s.string("ion_label", k.ion.label);
    k.flake.mass = s.quantity("flake_mass", Dimension::mass, k.flake.mass);
    k.flake.charge = s.quantity("flake_charge", Dimension::charge, k.flake.charge);
    k.flake.label = s.string("flake_label", k.flake.label);
    k.flake_radius = s.quantity("flake_radius", Dimension::length, k.flake_radius);
    k.omega1 = s.quantity("omega1", Dimension::angular_frequency, k.omega1);
    k.endcap_distance = s.quantity("endcap_distance", Dimension::length, k.endcap_distance);
    if (s.has("eta_inphase") && s.has("raman_wavenumber"))
      s.fail("raman_wavenumber", "give either eta_inphase or raman_wavenumber, not both");
    if (s.has("raman_wavenumber")) {
      k.eta_given = false;
      k.raman_wavenumber = s.quantity("raman_wavenumber", Dimension::wavenumber, 0.0);
    } else {
      k.eta_inphase = s.quantity("eta_inphase", Dimension::none, k.eta_inphase);
    }
    s.finish();
  }
  if (r.has("laser")) {
    Reader s = r.child("laser");
    c.laser.g = s.quantity("g", Dimension::angular_frequency, c.laser.g);
    c.laser.detuning = s.quantity("detuning", Dimension::angular_frequency, c.laser.detuning);
    c.laser.spin_splitting =
        s.quantity("spin_splitting", Dimension::angular_frequency, c.laser.spin_splitting);
    s.finish();
  }
  if (r.has("drive")) {
    Reader s = r.child("drive");
    c.drive.rabi = s.quantity("rabi", Dimension::angular_frequency, c.drive.rabi);
    c.drive.sdf_phase = s.quantity("sdf_phase", Dimension::angle, c.drive.sdf_phase);
    c.drive.inphase_model = s.choice("inphase_model", c.drive.inphase_model, kModels);
    s.finish();
  }
  if (r.has("protocol")) {
    Reader s = r.child("protocol");
    auto& p = c.protocol;
    p.t_split = s.quantity("t_split", Dimension::time, p.t_split);
    p.gain = s.quantity("gain", Dimension::none, p.gain);
    if (s.has("n_hold")) {
      const json& v = s.raw("n_hold");
      if (!v.is_array() || v.empty()) s.fail("n_hold", "expected a non-empty array of integers");
      p.n_hold.clear();
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() < 0)
          s.fail("n_hold", "entries must be non-negative integers");
        p.n_hold.push_back(e.get<int>());
      }
    }
    p.commensurate_split = s.boolean("commensurate_split", p.commensurate_split);
    p.hold_offset = s.quantity("hold_offset", Dimension::time, p.hold_offset);
    s.finish();
    if (!(p.t_split > 0.0)) r.fail("protocol", "t_split must be positive");
    if (!(p.gain >= 1.0)) r.fail("protocol", "gain must be >= 1");
  }
  if (r.has("collapse")) {
    const json& v = r.raw("collapse");
    if (v.is_string()) {
      if (v.get<std::string>() != "off") r.fail("collapse", "expected an object or \"off\"");
      c.collapse.enabled = false;
    } else {
      Reader s = r.child("collapse");
      auto& k = c.collapse;
      k.enabled = true;
      k.tau_e = s.quantity("tau_e", Dimension::time, k.tau_e, true);
      k.sigma = s.quantity("sigma", Dimension::length, k.sigma, true);
      k.frame = s.choice("frame", k.frame, kFrames);
      k.sampling = s.choice("sampling", k.sampling, kSampling);
      k.bernoulli_dt = s.quantity("bernoulli_dt", Dimension::time, k.bernoulli_dt);
      s.finish();
    }
  }
  if (r.has("ensemble")) {
    Reader s = r.child("ensemble");
    c.ensemble.trajectories = s.integer<std::uint64_t>("trajectories", c.ensemble.trajectories);
    c.ensemble.seed = s.integer<std::uint64_t>("seed", c.ensemble.seed);
    c.ensemble.bootstrap = s.integer<int>("bootstrap", c.ensemble.bootstrap);
    c.ensemble.trajectory_log = s.boolean("trajectory_log", c.ensemble.trajectory_log);
    s.finish();
  }
  if (r.has("thermal")) {
    Reader s = r.child("thermal");
    c.thermal.nbar_inphase = s.quantity("nbar_inphase", Dimension::none, 0.0);
    c.thermal.nbar_outofphase = s.quantity("nbar_outofphase", Dimension::none, 0.0);
    s.finish();
    if (c.thermal.nbar_inphase < 0 || c.thermal.nbar_outofphase < 0)
      r.fail("thermal", "occupations must be >= 0");
  }
  if (r.has("environment")) {
    Reader s = r.child("environment");
    auto& e = c.environment;
    e.pressure = s.quantity("pressure", Dimension::pressure, e.pressure);
    e.gas_temperature = s.quantity("gas_temperature", Dimension::temperature, e.gas_temperature);
    e.gas_molecule_mass = s.quantity("gas_molecule_mass", Dimension::mass, e.gas_molecule_mass);
    e.circuit_inductance = s.quantity("circuit_inductance", Dimension::inductance, e.circuit_inductance);
    e.circuit_omega = s.quantity("circuit_frequency", Dimension::angular_frequency, e.circuit_omega);
    e.circuit_temperature =
        s.quantity("circuit_temperature", Dimension::temperature, e.circuit_temperature);
    e.endcap_distance = s.quantity("endcap_distance", Dimension::length, e.endcap_distance);
    e.target_rate_min = s.quantity("target_rate_min", Dimension::rate, e.target_rate_min);
    e.target_rate_max = s.quantity("target_rate_max", Dimension::rate, e.target_rate_max);
    e.sr_threshold = s.quantity("shockley_ramo_threshold", Dimension::none, e.sr_threshold);
    e.quoted_pressure = s.quantity("quoted_pressure", Dimension::pressure, e.quoted_pressure);
    c.budget_delta_x = s.quantity("delta_x", Dimension::length, c.budget_delta_x);
    s.finish();
  }
  if (r.has("exclusion")) {
    Reader s = r.child("exclusion");
    auto& x = c.exclusion;
    x.gamma_bound = s.quantity("gamma_bound", Dimension::rate, x.gamma_bound);
    x.sigma_min = s.quantity("sigma_min", Dimension::length, x.sigma_min);
    x.sigma_max = s.quantity("sigma_max", Dimension::length, x.sigma_max);
    x.sigma_points = s.integer<int>("sigma_points", x.sigma_points);
    x.tau_min = s.quantity("tau_min", Dimension::time, x.tau_min);
    x.tau_max = s.quantity("tau_max", Dimension::time, x.tau_max);
    x.tau_points = s.integer<int>("tau_points", x.tau_points);
    x.delta_x = s.quantity("delta_x", Dimension::length, x.delta_x);
    s.finish();
    if (x.sigma_points < 2 || x.tau_points < 2) r.fail("exclusion", "grids need >= 2 points");
  }
  if (r.has("oracle")) {
    Reader s = r.child("oracle");
    auto& o = c.oracle;
    o.algebra_draws = s.integer<int>("algebra_draws", o.algebra_draws);
    o.algebra_N = s.integer<int>("algebra_N", o.algebra_N);
    o.propagation_drives = s.integer<int>("propagation_drives", o.propagation_drives);
    o.propagation_N = s.integer<int>("propagation_N", o.propagation_N);
    o.seed = s.integer<std::uint64_t>("seed", o.seed);
    s.finish();
  }
  if (r.has("output")) {
    Reader s = r.child("output");
    c.output.dir = s.string("dir", c.output.dir);
    c.output.samples = s.integer<int>("samples", c.output.samples);
    s.finish();
    if (c.output.samples < 2) r.fail("output", "samples must be >= 2");
  }
  r.finish();
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", line_at(text, e.byte > 0 ? e.byte - 1 : 0), std::string("malformed JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("schema") && j["schema"] == "cotrap.manifest/1") {
    if (!j.contains("config")) throw ConfigError("config", 0, "manifest has no embedded config");
    const std::string inner = j["config"].dump();
    return parse_config(inner);
  }
  Reader r(j, "", text, 0);
  return parse_root(r);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  auto q = [](double v, Dimension d) { return format_quantity(v, d); };
  json j;
  j["schema"] = "cotrap.config/1";
  const auto& k = c.crystal;
  json cr = {{"ion_mass", q(k.ion.mass, Dimension::mass)},
             {"ion_charge", q(k.ion.charge, Dimension::charge)},
             {"ion_label", k.ion.label},
             {"flake_mass", q(k.flake.mass, Dimension::mass)},
             {"flake_charge", q(k.flake.charge, Dimension::charge)},
             {"flake_label", k.flake.label},
             {"flake_radius", q(k.flake_radius, Dimension::length)},
             {"omega1", q(k.omega1, Dimension::angular_frequency)},
             {"endcap_distance", q(k.endcap_distance, Dimension::length)}};
  if (k.eta_given)
    cr["eta_inphase"] = q(k.eta_inphase, Dimension::none);
  else
    cr["raman_wavenumber"] = q(k.raman_wavenumber, Dimension::wavenumber);
  j["crystal"] = cr;
  j["laser"] = {{"g", q(c.laser.g, Dimension::angular_frequency)},
                {"detuning", q(c.laser.detuning, Dimension::angular_frequency)},
                {"spin_splitting", q(c.laser.spin_splitting, Dimension::angular_frequency)}};
  j["drive"] = {{"rabi", q(c.drive.rabi, Dimension::angular_frequency)},
                {"sdf_phase", q(c.drive.sdf_phase, Dimension::angle)},
                {"inphase_model", name_of(c.drive.inphase_model, kModels)}};
  j["protocol"] = {{"t_split", q(c.protocol.t_split, Dimension::time)},
                   {"gain", q(c.protocol.gain, Dimension::none)},
                   {"n_hold", c.protocol.n_hold},
                   {"commensurate_split", c.protocol.commensurate_split},
                   {"hold_offset", q(c.protocol.hold_offset, Dimension::time)}};
  if (c.collapse.enabled)
    j["collapse"] = {{"tau_e", q(c.collapse.tau_e, Dimension::time)},
                     {"sigma", q(c.collapse.sigma, Dimension::length)},
                     {"frame", name_of(c.collapse.frame, kFrames)},
                     {"sampling", name_of(c.collapse.sampling, kSampling)},
                     {"bernoulli_dt", q(c.collapse.bernoulli_dt, Dimension::time)}};
  else
    j["collapse"] = "off";
  j["ensemble"] = {{"trajectories", c.ensemble.trajectories},
                   {"seed", c.ensemble.seed},
                   {"bootstrap", c.ensemble.bootstrap},
                   {"trajectory_log", c.ensemble.trajectory_log}};
  j["thermal"] = {{"nbar_inphase", q(c.thermal.nbar_inphase, Dimension::none)},
                  {"nbar_outofphase", q(c.thermal.nbar_outofphase, Dimension::none)}};
  const auto& e = c.environment;
  j["environment"] = {{"pressure", q(e.pressure, Dimension::pressure)},
                      {"gas_temperature", q(e.gas_temperature, Dimension::temperature)},
                      {"gas_molecule_mass", q(e.gas_molecule_mass, Dimension::mass)},
                      {"circuit_inductance", q(e.circuit_inductance, Dimension::inductance)},
                      {"circuit_frequency", q(e.circuit_omega, Dimension::angular_frequency)},
                      {"circuit_temperature", q(e.circuit_temperature, Dimension::temperature)},
                      {"endcap_distance", q(e.endcap_distance, Dimension::length)},
                      {"target_rate_min", q(e.target_rate_min, Dimension::rate)},
                      {"target_rate_max", q(e.target_rate_max, Dimension::rate)},
                      {"shockley_ramo_threshold", q(e.sr_threshold, Dimension::none)},
                      {"quoted_pressure", q(e.quoted_pressure, Dimension::pressure)},
                      {"delta_x", q(c.budget_delta_x, Dimension::length)}};
  const auto& x = c.exclusion;
  j["exclusion"] = {{"gamma_bound", q(x.gamma_bound, Dimension::rate)},
                    {"sigma_min", q(x.sigma_min, Dimension::length)},
                    {"sigma_max", q(x.sigma_max, Dimension::length)},
                    {"sigma_points", x.sigma_points},
                    {"tau_min", q(x.tau_min, Dimension::time)},
                    {"tau_max", q(x.tau_max, Dimension::time)},
                    {"tau_points", x.tau_points},
                    {"delta_x", q(x.delta_x, Dimension::length)}};
  j["oracle"] = {{"algebra_draws", c.oracle.algebra_draws},
                 {"algebra_N", c.oracle.algebra_N},
                 {"propagation_drives", c.oracle.propagation_drives},
                 {"propagation_N", c.oracle.propagation_N},
                 {"seed", c.oracle.seed}};
  j["output"] = {{"dir", c.output.dir}, {"samples", c.output.samples}};
  return j.dump(2);
}

TrapSpec config_trap(const RunConfig& c) {
  TrapSpec t{c.crystal.omega1, c.crystal.raman_wavenumber, c.crystal.endcap_distance};
  if (c.crystal.eta_given)
    t.raman_wavenumber = raman_wavenumber_for_eta(c.crystal.ion, c.crystal.flake, t, c.crystal.eta_inphase);
  return t;
}

ModeStructure config_modes(const RunConfig& c) {
  return mode_structure(c.crystal.ion, c.crystal.flake, config_trap(c));
}

}  // namespace cotrap
