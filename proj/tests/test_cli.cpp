#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "cotrap/commands.hpp"
#include "cotrap/config.hpp"
#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"
#include "cotrap/output.hpp"

using namespace cotrap;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cotrap_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
  return out;
}

RunConfig small_mc(const fs::path& dir) {
  RunConfig c = parse_config(R"({
    "collapse": { "tau_e": "1e18 s", "sigma": "100 nm" },
    "protocol": { "n_hold": [0, 3] },
    "ensemble": { "trajectories": 24, "seed": 5, "bootstrap": 20 }
  })");
  c.output.dir = dir.string();
  return c;
}

int run(const std::string& cmd, const RunConfig& c, unsigned workers = 1, const std::string& fault = "") {
  std::ostringstream log;
  CommandContext ctx{workers, &log, fault};
  return run_command(cmd, c, ctx);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COTRAP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("quantity parsing") {
  CHECK(parse_quantity("1 MHz", Dimension::angular_frequency) == doctest::Approx(constants::two_pi * 1e6));
  CHECK(parse_quantity("1e6 rad/s", Dimension::angular_frequency) == 1e6);
  CHECK(parse_quantity(" 430 e ", Dimension::charge) == doctest::Approx(430 * constants::elementary_charge));
  CHECK(parse_quantity("0.8 um", Dimension::length) == doctest::Approx(0.8e-6));
  CHECK(parse_quantity("1e-12 mbar", Dimension::pressure) == doctest::Approx(1e-10));
  CHECK_THROWS_AS(parse_quantity("1 kg", Dimension::length), ParameterError);
  CHECK_THROWS_AS(parse_quantity("fast", Dimension::time), ParameterError);
  const double v = 0.1 + 0.2;
  CHECK(parse_quantity(format_quantity(v, Dimension::time), Dimension::time) == v);
}

TEST_CASE("built-in defaults and canonical serialization round trip") {
  const RunConfig d = parse_config("{}");
  CHECK(d.crystal.flake.charge == doctest::Approx(430 * constants::elementary_charge));
  CHECK(d.protocol.t_split == doctest::Approx(1e-3));
  const std::string s = serialize_config(d);
  CHECK(serialize_config(parse_config(s)) == s);

  RunConfig c = small_mc("x");
  c.protocol.commensurate_split = true;
  c.drive.inphase_model = PropagationModel::exact;
  const std::string cs = serialize_config(c);
  CHECK(cs != s);
  CHECK(serialize_config(parse_config(cs)) == cs);
}

TEST_CASE("the shipped configs parse") {
  for (const char* name : {"defaults.json", "collapse_sweep.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(COTRAP_SOURCE_DIR) + "/configs/" + name));
  }
  const RunConfig p = load_config(std::string(COTRAP_SOURCE_DIR) + "/configs/defaults.json");
  CHECK(p.collapse.enabled);
  CHECK(p.collapse.tau_e == doctest::Approx(1e16));
  CHECK(p.collapse.sigma == doctest::Approx(1e-7));
  CHECK(p.drive.rabi == doctest::Approx(parse_config("{}").drive.rabi).epsilon(1e-14));
}

TEST_CASE("config errors carry the key path and line") {
  const std::string text = "{\n  \"protocol\": {\n    \"t_split\": \"1 kg\"\n  }\n}\n";
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "protocol.t_split");
    CHECK(e.line() == 3);
  }
  try {
    parse_config("{\n \"drive\": { \"rabbi\": \"1 MHz\" }\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "drive.rabbi");
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config(R"({"crystal": {"eta_inphase": 2e-4, "raman_wavenumber": "1 1/um"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"protocol": {"t_split": 0.001}})"), ConfigError);  // unit required
  CHECK_THROWS_AS(parse_config(R"({"collapse": "on"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
}

TEST_CASE("CSV quoting and numbers") {
  CHECK(CsvWriter::quote("plain") == "plain");
  CHECK(CsvWriter::quote("a,b") == "\"a,b\"");
  CHECK(CsvWriter::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(CsvWriter::quote("two\nlines") == "\"two\nlines\"");
  CHECK(std::stod(CsvWriter::num(0.1)) == 0.1);
  CsvWriter w;
  w.comment("units");
  w.header({"a", "b"});
  w.row({"1", "x,y"});
  CHECK(w.str() == "# units\r\na,b\r\n1,\"x,y\"\r\n");
  CHECK_THROWS(w.row({"only one"}));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("collapse-mc outputs are reproducible, inventoried and worker independent") {
  const fs::path a = scratch_dir("mc_a"), b = scratch_dir("mc_b");
  REQUIRE(run("collapse-mc", small_mc(a), 1) == exit_ok);
  REQUIRE(run("collapse-mc", small_mc(b), 3) == exit_ok);
  CHECK(slurp(a / "visibility.csv") == slurp(b / "visibility.csv"));
  CHECK(slurp(a / "collapse_summary.json") == slurp(b / "collapse_summary.json"));

  // Every file in the directory appears in the manifest with its checksum.
  const json m = json::parse(slurp(a / "collapse-mc.manifest.json"));
  CHECK(m.at("schema") == "cotrap.manifest/1");
  CHECK(m.at("seed") == 5);
  std::set<std::string> listed{"collapse-mc.manifest.json"};
  for (const auto& f : m.at("outputs")) {
    const std::string name = f.at("file");
    listed.insert(name);
    CHECK(f.at("sha256") == sha256_file((a / name).string()));
  }
  CHECK(listing(a) == listed);

  // The manifest is itself a config that reproduces the run.
  const fs::path c = scratch_dir("mc_c");
  RunConfig again = load_config((a / "collapse-mc.manifest.json").string());
  again.output.dir = c.string();
  REQUIRE(run("collapse-mc", again) == exit_ok);
  CHECK(slurp(a / "visibility.csv") == slurp(c / "visibility.csv"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("collapse off gives unit visibility") {
  const fs::path d = scratch_dir("mc_off");
  RunConfig c = small_mc(d);
  c.collapse.enabled = false;
  REQUIRE(run("collapse-mc", c) == exit_ok);
  std::istringstream in(slurp(d / "visibility.csv"));
  std::string line;
  int rows = 0;
  std::size_t vcol = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (f[0] == "n_hold") {
      vcol = std::find(f.begin(), f.end(), "V") - f.begin();
      continue;
    }
    REQUIRE(vcol < f.size());
    CHECK(std::stod(f[vcol]) == doctest::Approx(1.0).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 2);
  fs::remove_all(d);
}

TEST_CASE("oracle-check exit codes") {
  const fs::path d = scratch_dir("oracle");
  RunConfig c = parse_config(R"({"oracle": {"algebra_draws": 3, "propagation_drives": 2}})");
  c.output.dir = d.string();
  CHECK(run("oracle-check", c) == exit_ok);
  CHECK(fs::exists(d / "oracle_report.json"));
  for (const char* fault : {"combD", "combS", "comm", "propagation", "visibility"}) {
    CAPTURE(fault);
    CHECK(run("oracle-check", c, 1, fault) == exit_oracle);
  }
  fs::remove_all(d);
}

TEST_CASE("command-line binary") {
  const fs::path d = scratch_dir("cli");
  fs::create_directories(d);
  {
    std::ofstream bad(d / "bad.json");
    bad << "{\n  \"protocol\": { \"t_split\": \"1 parsec\" }\n}\n";
  }
  CHECK(run_cli("modes --config " + (d / "bad.json").string()) == exit_config);
  CHECK(run_cli("modes --config " + (d / "missing.json").string()) == exit_config);
  CHECK(run_cli("modes --out " + (d / "modes").string()) == exit_ok);
  CHECK(fs::exists(d / "modes" / "modes.json"));
  CHECK(run_cli("budget --out " + (d / "budget").string()) == exit_ok);
  CHECK(fs::exists(d / "budget" / "budget.json"));
  CHECK(run_cli("no-such-command") != exit_ok);
  fs::remove_all(d);
}
