#pragma once

// Run configuration shared by every command. One JSON document; unknown keys
// are rejected at every level. Command-line flags only override fields.
//
//   {
//     "command": "simulate",                       // optional, must match the subcommand
//     "sheaf": {"builtin": "cycle", "n": 3, "variant": "identity"} | {"file": "path.json"},
//     "potential": {"kind": "monomial", "theta": [1, 0.25, 0.03]},
//     "node_field": {"kind": "zero"} | {"kind": "quadratic_anchor", "weight": 1, "anchor": [...]},
//     "simulation": {"alpha": 1, "step": 0.01, "horizon": 10, "seed": 0, "noise_std": 0,
//                    "record_derivatives": true,
//                    "initial_conditions": {"kind": "gaussian", "count": 4, "std": 1} |
//                                          {"kind": "states", "states": [[...], ...]}},
//     "identify": {"data_dir": "runs", "residuals": "observed" | "finite_difference",
//                  "ridge": 0, "threshold_lo": 0.25, "threshold_hi": 4, "grid_points": 64},
//     "experiment": {"id": "finite_basis", "cycle_lengths": [3], "seeds": [0, 1], ...},
//     "output_dir": "out"
//   }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sheafid/dynamics.hpp"
#include "sheafid/experiments.hpp"
#include "sheafid/potentials.hpp"
#include "sheafid/sheaf.hpp"
#include "sheafid/sysid.hpp"

namespace sheafid {

enum class Command { cohomology, simulate, identify, experiment };

std::string to_string(Command c);
std::optional<Command> command_from_string(const std::string& s);

struct SheafSource {
  std::string file;  // empty for the builtin cycle
  std::size_t cycle_length = 3;
  SheafVariant variant = SheafVariant::identity;
};

struct PotentialSpec {
  PotentialKind kind = PotentialKind::quadratic;
  std::vector<double> theta;
  double epsilon = 1.0;
  std::vector<double> target;  // shifted quadratic b, flat C^1 vector
  std::vector<std::size_t> negative_edges;
  std::vector<double> constant_force;  // flat C^1 vector, or one edge-stalk vector broadcast to all edges
};

struct NodeFieldSpec {
  bool anchored = false;
  double weight = 0.0;
  std::vector<double> anchor;
};

struct InitialConditionSpec {
  bool explicit_states = false;
  std::size_t count = 1;
  double stddev = 1.0;
  std::vector<std::vector<double>> states;
};

struct SimulationSpec {
  SimConfig sim;
  bool record_derivatives = true;
  InitialConditionSpec initial;
};

struct IdentifySpec {
  std::string data_dir;
  ResidualMode residuals = ResidualMode::finite_difference;
  double ridge = 0.0;
  ThresholdSearch search;
};

struct ExperimentSpec {
  ExperimentConfig base;
  std::vector<std::size_t> cycle_lengths = {3, 5};
};

struct RunConfig {
  std::optional<Command> command;
  SheafSource sheaf;
  PotentialSpec potential;
  NodeFieldSpec node_field;
  SimulationSpec simulation;
  IdentifySpec identify;
  ExperimentSpec experiment;
  std::string output_dir = ".";
  bool has_sheaf = false;
  bool has_potential = false;
  bool has_experiment = false;
};

// Parses and validates the document; throws Error(config) on any problem.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Canonical JSON of everything that influences outputs (output_dir excluded).
std::string canonical_config(const RunConfig& cfg);

// 64-bit FNV-1a of the canonical config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

Sheaf resolve_sheaf(const SheafSource& src);
PotentialModel resolve_potential(const PotentialSpec& spec, const Sheaf& sheaf);
NodeField resolve_node_field(const NodeFieldSpec& spec, const Sheaf& sheaf);

}  // namespace sheafid
