#include "sheafid/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sheafid/error.hpp"
#include "sheafid/io.hpp"

namespace sheafid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kInitialConditionStream = 0x1c0;

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

std::string header_lines(const std::string& hash, const std::vector<std::uint64_t>& seeds,
                         const std::string& extra_key = "", const std::string& extra_value = "") {
  std::string out = "# config_hash=" + hash + "\n# seeds=" + join_seeds(seeds) + "\n";
  if (!extra_key.empty()) out += "# " + extra_key + "=" + extra_value + "\n";
  return out;
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::io, "cannot create output directory '" + cfg.output_dir + "'");
  return dir;
}

void emit(CommandResult& res, const fs::path& path, const std::string& text) {
  write_text_file(path.string(), text);
  res.files.push_back(path.string());
}

std::vector<Vec> simulation_initial_conditions(const RunConfig& cfg, const Sheaf& sheaf) {
  const InitialConditionSpec& ic = cfg.simulation.initial;
  std::vector<Vec> out;
  const auto d0 = static_cast<Eigen::Index>(sheaf.d0());
  if (ic.explicit_states) {
    for (const auto& s : ic.states) {
      require(static_cast<Eigen::Index>(s.size()) == d0, ErrorKind::config,
              "initial state has length " + std::to_string(s.size()) + ", expected dim C0 = " + std::to_string(d0));
      out.push_back(Eigen::Map<const Vec>(s.data(), d0));
    }
    return out;
  }
  std::mt19937_64 rng(derive_seed(cfg.simulation.sim.seed, kInitialConditionStream));
  std::normal_distribution<double> dist(0.0, ic.stddev);
  for (std::size_t i = 0; i < ic.count; ++i) {
    Vec x(d0);
    for (Eigen::Index k = 0; k < d0; ++k) x(k) = dist(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace

RunConfig prepare_config(RunConfig cfg, const CommandOptions& opts) {
  if (cfg.command) {
    require(*cfg.command == opts.command, ErrorKind::usage,
            "config is for command '" + to_string(*cfg.command) + "', not '" + to_string(opts.command) + "'");
  }
  cfg.command = opts.command;
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  if (opts.seed) {
    cfg.simulation.sim.seed = *opts.seed;
    cfg.experiment.base.seeds = {*opts.seed};
  }
  if (!cfg.has_sheaf && opts.command != Command::experiment) cfg.has_sheaf = true;  // builtin 3-cycle
  switch (opts.command) {
    case Command::simulate:
      if (!cfg.has_potential) cfg.has_potential = true;  // quadratic
      break;
    case Command::identify:
      require(cfg.has_potential, ErrorKind::config, "identify needs a potential family");
      require(!cfg.identify.data_dir.empty(), ErrorKind::config, "identify needs identify.data_dir");
      break;
    case Command::experiment:
      require(cfg.has_experiment, ErrorKind::config, "experiment needs an experiment section");
      break;
    case Command::cohomology:
      break;
  }
  return cfg;
}

CommandResult cmd_cohomology(const RunConfig& cfg) {
  CommandResult res;
  res.config_hash = config_hash(cfg);
  const Coboundary op(resolve_sheaf(cfg.sheaf));
  const SpectrumSummary spec = laplacian_spectrum(op);
  const HarmonicSpace h1 = harmonic_basis(op);

  std::ostringstream os;
  os << "dim C0 = " << op.d0() << "\n";
  os << "dim C1 = " << op.d1() << "\n";
  os << "dim H0 = " << spec.dim_h0 << "\n";
  os << "dim H1 = " << spec.dim_h1 << "\n";
  os << "rank delta = " << spec.rank << "\n";
  os << "lambda(delta* delta) min = " << format_double(spec.lambda_min) << "\n";
  os << "lambda(delta* delta) min nonzero = " << format_double(spec.lambda_min_nonzero) << "\n";
  os << "lambda(delta* delta) max = " << format_double(spec.lambda_max) << "\n";
  res.summary = os.str();

  const fs::path dir = output_dir(cfg);
  emit(res, dir / ("cohomology_" + res.config_hash + ".txt"), header_lines(res.config_hash, {}) + res.summary);

  std::ostringstream basis;
  basis << header_lines(res.config_hash, {}, "dim_h1", std::to_string(h1.dim()));
  basis << "coordinate";
  for (std::size_t j = 0; j < h1.dim(); ++j) basis << ",h" << j;
  basis << "\n";
  for (Eigen::Index i = 0; i < h1.basis.rows(); ++i) {
    basis << i;
    for (Eigen::Index j = 0; j < h1.basis.cols(); ++j) basis << ',' << format_double(h1.basis(i, j));
    basis << "\n";
  }
  emit(res, dir / ("harmonic_basis_" + res.config_hash + ".csv"), basis.str());
  return res;
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  CommandResult res;
  res.config_hash = config_hash(cfg);
  const Coboundary op(resolve_sheaf(cfg.sheaf));
  const PotentialModel model = resolve_potential(cfg.potential, op.sheaf());
  const NodeField field = resolve_node_field(cfg.node_field, op.sheaf());
  const std::vector<Vec> ics = simulation_initial_conditions(cfg, op.sheaf());
  const SimConfig& sim = cfg.simulation.sim;
  const std::vector<EnsembleMember> members = simulate_ensemble(op, model, field, ics, sim);

  const fs::path dir = output_dir(cfg);
  json manifest;
  manifest["config_hash"] = res.config_hash;
  manifest["config"] = json::parse(canonical_config(cfg));
  manifest["seeds"] = {sim.seed};
  manifest["trajectories"] = json::array();
  std::size_t diverged = 0;
  std::ostringstream summary;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const EnsembleMember& m = members[i];
    Trajectory traj = m.trajectory;
    if (!cfg.simulation.record_derivatives) traj.derivs.clear();
    CsvComments comments{{"config_hash", res.config_hash},
                         {"seeds", std::to_string(sim.seed)},
                         {"seed", std::to_string(sim.seed)},
                         {"member_seed", std::to_string(m.seed)},
                         {"trajectory", std::to_string(i)},
                         {"noise_std", format_double(sim.noise_std)},
                         {"diverged", m.diverged_at ? "true" : "false"}};
    if (m.diverged_at) comments["diverged_at"] = format_double(*m.diverged_at);
    char name[64];
    std::snprintf(name, sizeof name, "trajectory_%s_%03zu.csv", res.config_hash.c_str(), i);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj, comments);
    emit(res, dir / name, csv.str());

    json entry = {{"file", name}, {"index", i}, {"member_seed", m.seed}, {"samples", traj.size()},
                  {"diverged", m.diverged_at.has_value()}};
    if (m.diverged_at) entry["diverged_at"] = *m.diverged_at;
    manifest["trajectories"].push_back(entry);
    if (m.diverged_at) {
      ++diverged;
      summary << "trajectory " << i << " diverged at t = " << format_double(*m.diverged_at) << "\n";
    } else if (!traj.states.empty()) {
      summary << "trajectory " << i << ": " << traj.size() << " samples, |x(T)| = "
              << format_double(std::sqrt(op.norm0_sq(traj.states.back()))) << "\n";
    }
  }
  manifest["diverged_count"] = diverged;
  emit(res, dir / ("manifest_" + res.config_hash + ".json"), manifest.dump(2) + "\n");
  res.summary = summary.str();
  if (diverged > 0) {
    res.exit_code = kExitDivergence;
    res.error = std::to_string(diverged) + " trajectory(ies) diverged; partial outputs kept";
  }
  return res;
}

CommandResult cmd_identify(const RunConfig& cfg) {
  CommandResult res;
  res.config_hash = config_hash(cfg);
  const Coboundary op(resolve_sheaf(cfg.sheaf));
  const PotentialModel family = resolve_potential(cfg.potential, op.sheaf());
  require(family.is_parametric(), ErrorKind::config,
          "potential family '" + to_string(family.kind()) + "' has no free parameters to identify");

  const fs::path data_dir(cfg.identify.data_dir);
  require(fs::is_directory(data_dir), ErrorKind::usage, "data directory '" + cfg.identify.data_dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorKind::usage, "no trajectory CSV files in '" + cfg.identify.data_dir + "'");

  const NodeField field = resolve_node_field(cfg.node_field, op.sheaf());
  ResidualDataset data;
  std::set<std::uint64_t> seeds;
  std::set<std::string> data_hashes;
  json file_names = json::array();
  for (const fs::path& p : files) {
    CsvComments comments;
    const Trajectory traj = read_trajectory_csv(p.string(), &comments);
    require(traj.size() >= 3, ErrorKind::usage, p.filename().string() + ": too few samples");
    require(traj.dim() == op.d0(), ErrorKind::usage,
            p.filename().string() + ": state dimension " + std::to_string(traj.dim()) + " does not match dim C0 = " +
                std::to_string(op.d0()));
    if (cfg.identify.residuals == ResidualMode::observed) {
      require(traj.has_derivs(), ErrorKind::usage,
              p.filename().string() + ": observed residuals need derivative columns");
      data.append(residuals_exact(op, traj, field));
    } else {
      data.append(residuals_fd(op, traj, field));
    }
    if (auto it = comments.find("seed"); it != comments.end()) {
      try {
        seeds.insert(std::stoull(it->second));
      } catch (...) {
      }
    }
    if (auto it = comments.find("config_hash"); it != comments.end()) data_hashes.insert(it->second);
    file_names.push_back(p.filename().string());
  }

  EstimationResult fit;
  if (family.kind() == PotentialKind::bounded_confidence) {
    fit = fit_threshold(op, data, cfg.identify.search);
  } else {
    fit = fit_linear(op, family, data, cfg.identify.ridge);
  }

  json report;
  report["config_hash"] = res.config_hash;
  report["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  report["data_config_hashes"] = std::vector<std::string>(data_hashes.begin(), data_hashes.end());
  report["data_files"] = file_names;
  report["family"] = to_string(family.kind());
  report["residuals"] = to_string(cfg.identify.residuals);
  report["ridge"] = cfg.identify.ridge;
  report["sample_count"] = fit.sample_count;
  report["estimate"] = fit.theta;
  report["lambda_min"] = fit.report.lambda_min;
  report["lambda_max"] = fit.report.lambda_max;
  report["identifiable"] = fit.report.identifiable;
  report["effective_rank"] = fit.effective_rank;
  report["objective_value"] = fit.objective_value;
  const fs::path dir = output_dir(cfg);
  emit(res, dir / ("estimate_" + res.config_hash + ".json"), report.dump(2) + "\n");

  std::ostringstream os;
  os << "family = " << to_string(family.kind()) << "\n";
  os << "estimate =";
  for (double v : fit.theta) os << " " << format_double(v);
  os << "\nlambda_min = " << format_double(fit.report.lambda_min) << "\n";
  os << "identifiable = " << (fit.report.identifiable ? "yes" : "no") << "\n";
  os << "objective = " << format_double(fit.objective_value) << "\n";
  res.summary = os.str();
  return res;
}

CommandResult cmd_experiment(const RunConfig& cfg) {
  CommandResult res;
  res.config_hash = config_hash(cfg);
  const ExperimentConfig& base = cfg.experiment.base;
  const ExperimentReport report = run_experiment(base, cfg.experiment.cycle_lengths);
  const fs::path dir = output_dir(cfg);
  const std::string prefix = to_string(base.id) + "_" + res.config_hash + "_";
  const std::string head = header_lines(res.config_hash, base.seeds, "experiment", to_string(base.id));
  std::ostringstream summary;
  for (const Table& t : report.tables) {
    emit(res, dir / (prefix + t.name + ".csv"), head + t.to_csv());
    emit(res, dir / (prefix + t.name + ".txt"), head + t.to_text());
    summary << t.to_text() << "\n";
  }
  for (const Table& t : report.series) emit(res, dir / (prefix + t.name + ".csv"), head + t.to_csv());
  res.summary = summary.str();
  return res;
}

CommandResult run_command(const CommandOptions& opts) {
  CommandResult res;
  try {
    RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
    cfg = prepare_config(std::move(cfg), opts);
    switch (opts.command) {
      case Command::cohomology: return cmd_cohomology(cfg);
      case Command::simulate: return cmd_simulate(cfg);
      case Command::identify: return cmd_identify(cfg);
      case Command::experiment: return cmd_experiment(cfg);
    }
  } catch (const DivergenceError& e) {
    res.exit_code = kExitDivergence;
    res.error = e.what();
  } catch (const Error& e) {
    res.exit_code = e.kind() == ErrorKind::divergence ? kExitDivergence : kExitUsage;
    res.error = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitUsage;
    res.error = e.what();
  }
  return res;
}

}  // namespace sheafid
