#pragma once

// Command layer behind the CLI: each command reads a RunConfig, writes its
// outputs into the output directory and returns a printable summary.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sheafid/config.hpp"

namespace sheafid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDivergence = 2;

struct CommandOptions {
  Command command = Command::cohomology;
  std::string config_path;  // empty: all defaults
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string summary;             // human-readable report
  std::string error;               // set when exit_code != 0
  std::vector<std::string> files;  // written files, in write order
  std::string config_hash;
};

// Applies flag overrides and fills implied defaults so the hash covers them.
RunConfig prepare_config(RunConfig cfg, const CommandOptions& opts);

CommandResult cmd_cohomology(const RunConfig& cfg);
CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_identify(const RunConfig& cfg);
CommandResult cmd_experiment(const RunConfig& cfg);

// Loads the config, dispatches, and maps errors to exit codes. Never throws.
CommandResult run_command(const CommandOptions& opts);

}  // namespace sheafid
