#include "sheafid/config.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "sheafid/error.hpp"
#include "sheafid/io.hpp"

namespace sheafid {

using nlohmann::json;

namespace {

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require(obj.is_object(), ErrorKind::config, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, ErrorKind::config, where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number(), ErrorKind::config, where + "." + key + " must be a number");
  return obj[key].get<double>();
}

std::uint64_t get_uint(const json& obj, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), ErrorKind::config,
          where + "." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_string(), ErrorKind::config, where + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const char* key, const std::string& where) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  require(obj[key].is_array(), ErrorKind::config, where + "." + key + " must be an array of numbers");
  for (const json& v : obj[key]) {
    require(v.is_number(), ErrorKind::config, where + "." + key + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename T>
std::vector<T> get_uints(const json& obj, const char* key, const std::string& where) {
  std::vector<T> out;
  require(obj[key].is_array(), ErrorKind::config, where + "." + key + " must be an array of integers");
  for (const json& v : obj[key]) {
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), ErrorKind::config,
            where + "." + key + " must be an array of non-negative integers");
    out.push_back(static_cast<T>(v.get<std::uint64_t>()));
  }
  return out;
}

SheafSource parse_sheaf_source(const json& j) {
  only_keys(j, {"builtin", "n", "variant", "file"}, "sheaf");
  SheafSource src;
  if (j.contains("file")) {
    require(!j.contains("builtin") && !j.contains("n") && !j.contains("variant"), ErrorKind::config,
            "sheaf: give either file or builtin, not both");
    src.file = get_string(j, "file", "", "sheaf");
    require(!src.file.empty(), ErrorKind::config, "sheaf.file must not be empty");
    return src;
  }
  const std::string builtin = get_string(j, "builtin", "cycle", "sheaf");
  require(builtin == "cycle", ErrorKind::config, "sheaf.builtin must be 'cycle'");
  src.cycle_length = static_cast<std::size_t>(get_uint(j, "n", 3, "sheaf"));
  const auto v = sheaf_variant_from_string(get_string(j, "variant", "identity", "sheaf"));
  require(v.has_value(), ErrorKind::config, "sheaf.variant must be identity or rotated");
  src.variant = *v;
  return src;
}

PotentialSpec parse_potential(const json& j) {
  only_keys(j, {"kind", "theta", "epsilon", "b", "negative_edges", "c"}, "potential");
  PotentialSpec p;
  const auto kind = potential_kind_from_string(get_string(j, "kind", "", "potential"));
  require(kind.has_value(), ErrorKind::config, "potential.kind is missing or unknown");
  p.kind = *kind;
  p.theta = get_numbers(j, "theta", "potential");
  p.epsilon = get_number(j, "epsilon", 1.0, "potential");
  p.target = get_numbers(j, "b", "potential");
  if (j.contains("negative_edges")) p.negative_edges = get_uints<std::size_t>(j, "negative_edges", "potential");
  p.constant_force = get_numbers(j, "c", "potential");
  switch (p.kind) {
    case PotentialKind::monomial:
      require(!p.theta.empty(), ErrorKind::config, "monomial potential needs theta");
      break;
    case PotentialKind::harmonic_augmented:
      require(p.theta.size() >= 2 && !p.constant_force.empty(), ErrorKind::config,
              "harmonic_augmented potential needs theta (monomials plus one coefficient) and c");
      break;
    case PotentialKind::shifted_quadratic:
      require(!p.target.empty(), ErrorKind::config, "shifted_quadratic potential needs b");
      break;
    case PotentialKind::bounded_confidence:
      require(p.epsilon > 0.0, ErrorKind::config, "potential.epsilon must be positive");
      break;
    default:
      break;
  }
  return p;
}

NodeFieldSpec parse_node_field(const json& j) {
  only_keys(j, {"kind", "weight", "anchor"}, "node_field");
  NodeFieldSpec n;
  const std::string kind = get_string(j, "kind", "zero", "node_field");
  if (kind == "zero") return n;
  require(kind == "quadratic_anchor", ErrorKind::config, "node_field.kind must be zero or quadratic_anchor");
  n.anchored = true;
  n.weight = get_number(j, "weight", 1.0, "node_field");
  n.anchor = get_numbers(j, "anchor", "node_field");
  return n;
}

SimulationSpec parse_simulation(const json& j) {
  only_keys(j, {"alpha", "step", "horizon", "seed", "noise_std", "record_derivatives", "initial_conditions"},
            "simulation");
  SimulationSpec s;
  s.sim.alpha = get_number(j, "alpha", 1.0, "simulation");
  s.sim.step = get_number(j, "step", 0.01, "simulation");
  s.sim.horizon = get_number(j, "horizon", 10.0, "simulation");
  s.sim.seed = get_uint(j, "seed", 0, "simulation");
  s.sim.noise_std = get_number(j, "noise_std", 0.0, "simulation");
  if (j.contains("record_derivatives")) {
    require(j["record_derivatives"].is_boolean(), ErrorKind::config, "simulation.record_derivatives must be a boolean");
    s.record_derivatives = j["record_derivatives"].get<bool>();
  }
  if (j.contains("initial_conditions")) {
    const json& ic = j["initial_conditions"];
    only_keys(ic, {"kind", "count", "std", "states"}, "simulation.initial_conditions");
    const std::string kind = get_string(ic, "kind", "gaussian", "simulation.initial_conditions");
    if (kind == "states") {
      s.initial.explicit_states = true;
      require(ic.contains("states") && ic["states"].is_array() && !ic["states"].empty(), ErrorKind::config,
              "initial_conditions.states must be a non-empty array of state vectors");
      for (const json& st : ic["states"]) {
        json wrap = {{"v", st}};
        s.initial.states.push_back(get_numbers(wrap, "v", "initial_conditions.states"));
      }
      s.initial.count = s.initial.states.size();
    } else {
      require(kind == "gaussian", ErrorKind::config, "initial_conditions.kind must be gaussian or states");
      s.initial.count = static_cast<std::size_t>(get_uint(ic, "count", 1, "initial_conditions"));
      s.initial.stddev = get_number(ic, "std", 1.0, "initial_conditions");
      require(s.initial.count > 0 && s.initial.stddev >= 0.0, ErrorKind::config,
              "initial_conditions needs count > 0 and std >= 0");
    }
  }
  try {
    s.sim.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("simulation: ") + e.what());
  }
  return s;
}

IdentifySpec parse_identify(const json& j) {
  only_keys(j, {"data_dir", "residuals", "ridge", "threshold_lo", "threshold_hi", "grid_points"}, "identify");
  IdentifySpec s;
  s.data_dir = get_string(j, "data_dir", "", "identify");
  const std::string mode = get_string(j, "residuals", "finite_difference", "identify");
  require(mode == "observed" || mode == "finite_difference", ErrorKind::config,
          "identify.residuals must be observed or finite_difference");
  s.residuals = mode == "observed" ? ResidualMode::observed : ResidualMode::finite_difference;
  s.ridge = get_number(j, "ridge", 0.0, "identify");
  s.search.lo = get_number(j, "threshold_lo", s.search.lo, "identify");
  s.search.hi = get_number(j, "threshold_hi", s.search.hi, "identify");
  s.search.grid_points = static_cast<std::size_t>(get_uint(j, "grid_points", s.search.grid_points, "identify"));
  require(s.ridge >= 0.0, ErrorKind::config, "identify.ridge must be non-negative");
  require(s.search.lo > 0.0 && s.search.hi > s.search.lo && s.search.grid_points >= 3, ErrorKind::config,
          "identify threshold search needs 0 < lo < hi and at least 3 grid points");
  return s;
}

ExperimentSpec parse_experiment(const json& j) {
  only_keys(j,
            {"id", "cycle_lengths", "seeds", "step", "horizon", "noise_std", "scales", "train_count",
             "holdout_count", "limited_lo", "limited_hi", "annulus_lo", "annulus_hi", "eval_stride"},
            "experiment");
  const auto id = experiment_id_from_string(get_string(j, "id", "", "experiment"));
  require(id.has_value(), ErrorKind::config,
          "experiment.id must be formation_transfer, bounded_confidence or finite_basis");
  ExperimentSpec s;
  ExperimentConfig& c = s.base;
  c = default_experiment_config(*id);
  if (j.contains("cycle_lengths")) s.cycle_lengths = get_uints<std::size_t>(j, "cycle_lengths", "experiment");
  if (j.contains("seeds")) c.seeds = get_uints<std::uint64_t>(j, "seeds", "experiment");
  c.step = get_number(j, "step", c.step, "experiment");
  c.horizon = get_number(j, "horizon", c.horizon, "experiment");
  c.noise_std = get_number(j, "noise_std", c.noise_std, "experiment");
  if (j.contains("scales")) c.scales = get_numbers(j, "scales", "experiment");
  c.train_count = static_cast<std::size_t>(get_uint(j, "train_count", c.train_count, "experiment"));
  c.holdout_count = static_cast<std::size_t>(get_uint(j, "holdout_count", c.holdout_count, "experiment"));
  c.limited_lo = get_number(j, "limited_lo", c.limited_lo, "experiment");
  c.limited_hi = get_number(j, "limited_hi", c.limited_hi, "experiment");
  c.annulus_lo = get_number(j, "annulus_lo", c.annulus_lo, "experiment");
  c.annulus_hi = get_number(j, "annulus_hi", c.annulus_hi, "experiment");
  c.eval_stride = static_cast<std::size_t>(get_uint(j, "eval_stride", c.eval_stride, "experiment"));
  require(!s.cycle_lengths.empty(), ErrorKind::config, "experiment.cycle_lengths must not be empty");
  for (std::size_t n : s.cycle_lengths) {
    require(n >= 3, ErrorKind::config, "experiment.cycle_lengths entries must be at least 3");
  }
  if (c.id != ExperimentId::formation_transfer) {
    require(s.cycle_lengths.size() == 1, ErrorKind::config,
            "bounded_confidence and finite_basis take a single cycle length");
  }
  c.cycle_length = s.cycle_lengths.front();
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("experiment: ") + e.what());
  }
  return s;
}

json numbers(const std::vector<double>& v) { return json(v); }

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::cohomology: return "cohomology";
    case Command::simulate: return "simulate";
    case Command::identify: return "identify";
    case Command::experiment: return "experiment";
  }
  return "unknown";
}

std::optional<Command> command_from_string(const std::string& s) {
  for (auto c : {Command::cohomology, Command::simulate, Command::identify, Command::experiment}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(doc, {"command", "sheaf", "potential", "node_field", "simulation", "identify", "experiment", "output_dir"},
            "config");
  RunConfig cfg;
  if (doc.contains("command")) {
    cfg.command = command_from_string(get_string(doc, "command", "", "config"));
    require(cfg.command.has_value(), ErrorKind::config, "config.command is unknown");
  }
  if (doc.contains("sheaf")) {
    cfg.sheaf = parse_sheaf_source(doc["sheaf"]);
    cfg.has_sheaf = true;
  }
  if (doc.contains("potential")) {
    cfg.potential = parse_potential(doc["potential"]);
    cfg.has_potential = true;
  }
  if (doc.contains("node_field")) cfg.node_field = parse_node_field(doc["node_field"]);
  if (doc.contains("simulation")) cfg.simulation = parse_simulation(doc["simulation"]);
  if (doc.contains("identify")) cfg.identify = parse_identify(doc["identify"]);
  if (doc.contains("experiment")) {
    cfg.experiment = parse_experiment(doc["experiment"]);
    cfg.has_experiment = true;
  }
  cfg.output_dir = get_string(doc, "output_dir", ".", "config");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
  return parse_run_config(text);
}

std::string canonical_config(const RunConfig& cfg) {
  json doc;
  doc["command"] = cfg.command ? to_string(*cfg.command) : "";
  if (cfg.has_sheaf) {
    if (!cfg.sheaf.file.empty()) {
      // The file content, not its path, determines results.
      doc["sheaf"] = {{"file_content_hash", fnv1a64(read_text_file(cfg.sheaf.file))}};
    } else {
      doc["sheaf"] = {{"builtin", "cycle"}, {"n", cfg.sheaf.cycle_length}, {"variant", to_string(cfg.sheaf.variant)}};
    }
  }
  if (cfg.has_potential) {
    const PotentialSpec& p = cfg.potential;
    doc["potential"] = {{"kind", to_string(p.kind)}, {"theta", numbers(p.theta)}, {"epsilon", p.epsilon},
                        {"b", numbers(p.target)}, {"negative_edges", p.negative_edges},
                        {"c", numbers(p.constant_force)}};
  }
  doc["node_field"] = cfg.node_field.anchored
                          ? json{{"kind", "quadratic_anchor"}, {"weight", cfg.node_field.weight},
                                 {"anchor", numbers(cfg.node_field.anchor)}}
                          : json{{"kind", "zero"}};
  const SimulationSpec& s = cfg.simulation;
  json ic = s.initial.explicit_states ? json{{"kind", "states"}, {"states", s.initial.states}}
                                      : json{{"kind", "gaussian"}, {"count", s.initial.count}, {"std", s.initial.stddev}};
  doc["simulation"] = {{"alpha", s.sim.alpha}, {"step", s.sim.step}, {"horizon", s.sim.horizon},
                       {"seed", s.sim.seed}, {"noise_std", s.sim.noise_std},
                       {"record_derivatives", s.record_derivatives}, {"initial_conditions", ic}};
  const IdentifySpec& id = cfg.identify;
  doc["identify"] = {{"data_dir", id.data_dir}, {"residuals", to_string(id.residuals)}, {"ridge", id.ridge},
                     {"threshold_lo", id.search.lo}, {"threshold_hi", id.search.hi},
                     {"grid_points", id.search.grid_points}};
  if (cfg.has_experiment) {
    const ExperimentConfig& c = cfg.experiment.base;
    doc["experiment"] = {{"id", to_string(c.id)}, {"cycle_lengths", cfg.experiment.cycle_lengths},
                         {"seeds", c.seeds}, {"step", c.step}, {"horizon", c.horizon},
                         {"noise_std", c.noise_std}, {"scales", numbers(c.scales)},
                         {"train_count", c.train_count}, {"holdout_count", c.holdout_count},
                         {"limited_lo", c.limited_lo}, {"limited_hi", c.limited_hi},
                         {"annulus_lo", c.annulus_lo}, {"annulus_hi", c.annulus_hi},
                         {"eval_stride", c.eval_stride}};
  }
  return doc.dump();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

Sheaf resolve_sheaf(const SheafSource& src) {
  if (!src.file.empty()) return load_sheaf(src.file);
  return make_cycle_sheaf(src.cycle_length, src.variant);
}

namespace {

Vec edge_vector(const std::vector<double>& v, const Sheaf& sheaf, const char* what) {
  const std::size_t d1 = sheaf.d1();
  if (v.size() == d1) return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  bool uniform = !sheaf.edge_dims.empty();
  for (int d : sheaf.edge_dims) uniform = uniform && static_cast<std::size_t>(d) == v.size();
  require(uniform, ErrorKind::config,
          std::string("potential.") + what + " must have length dim C1 = " + std::to_string(d1) +
              " or one edge-stalk dimension");
  Vec out(static_cast<Eigen::Index>(d1));
  for (std::size_t e = 0; e < sheaf.graph.edges.size(); ++e) {
    out.segment(static_cast<Eigen::Index>(e * v.size()), static_cast<Eigen::Index>(v.size())) =
        Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return out;
}

}  // namespace

PotentialModel resolve_potential(const PotentialSpec& spec, const Sheaf& sheaf) {
  PotentialModel m;
  switch (spec.kind) {
    case PotentialKind::quadratic: m = PotentialModel::quadratic(); break;
    case PotentialKind::shifted_quadratic:
      m = PotentialModel::shifted_quadratic(edge_vector(spec.target, sheaf, "b"));
      break;
    case PotentialKind::bounded_confidence: m = PotentialModel::bounded_confidence(spec.epsilon); break;
    case PotentialKind::antagonistic: m = PotentialModel::antagonistic(spec.negative_edges); break;
    case PotentialKind::monomial: m = PotentialModel::monomial(spec.theta); break;
    case PotentialKind::harmonic_augmented:
      m = PotentialModel::harmonic_augmented(spec.theta, edge_vector(spec.constant_force, sheaf, "c"));
      break;
  }
  try {
    m.check_compatible(sheaf);
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
  return m;
}

NodeField resolve_node_field(const NodeFieldSpec& spec, const Sheaf& sheaf) {
  if (!spec.anchored) return NodeField::zero();
  require(spec.anchor.size() == sheaf.d0(), ErrorKind::config,
          "node_field.anchor must have length dim C0 = " + std::to_string(sheaf.d0()));
  return NodeField::quadratic_anchor(spec.weight,
                                     Eigen::Map<const Vec>(spec.anchor.data(), static_cast<Eigen::Index>(spec.anchor.size())));
}

}  // namespace sheafid
