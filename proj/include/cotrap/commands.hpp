#pragma once

#include <ostream>
#include <string>

#include "cotrap/config.hpp"
#include "cotrap/drives.hpp"

namespace cotrap {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
  exit_ok = 0,
  exit_other = 1,
  exit_config = 2,
  exit_physics = 3,
  exit_oracle = 4,
};

struct CommandContext {
  unsigned workers = 1;
  std::ostream* log = nullptr;  // human-readable report
  std::string inject_fault;     // oracle-check only
};

/// Calibrated protocol shared by the commands.
struct Experiment {
  ModeStructure modes;
  SDFDrive sdf;
  PACalibration calibration;
  PADrive pa;
  double t_split = 0.0;
  PropagationModel inphase_model = PropagationModel::rotating_wave;
  double hold_offset = 0.0;

  ProtocolSchedule schedule(int n_hold) const;
};
Experiment make_experiment(const RunConfig& c);

int cmd_modes(const RunConfig& c, const CommandContext& ctx);
int cmd_split(const RunConfig& c, const CommandContext& ctx);
int cmd_collapse_mc(const RunConfig& c, const CommandContext& ctx);
int cmd_exclusion(const RunConfig& c, const CommandContext& ctx);
int cmd_budget(const RunConfig& c, const CommandContext& ctx);
int cmd_oracle_check(const RunConfig& c, const CommandContext& ctx);

/// Dispatch by subcommand name; translates exceptions into exit codes.
int run_command(const std::string& name, const RunConfig& c, const CommandContext& ctx);

}  // namespace cotrap
