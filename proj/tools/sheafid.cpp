// Command-line front end. Everything goes through the C interface.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "sheafid/sheafid.h"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool quiet = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "run config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", f.seed, "seed override");
  sub->add_flag("--quiet", f.quiet, "suppress the summary on stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear sheaf diffusion: simulation and edge-potential identification"};
  app.set_version_flag("--version", sheafid_version());
  app.require_subcommand(1);

  Flags flags;
  const char* names[] = {"cohomology", "simulate", "identify", "experiment"};
  const char* help[] = {"cohomology dimensions, Laplacian spectrum, harmonic basis",
                        "integrate trajectories and write CSV files plus a manifest",
                        "fit an edge-potential family to trajectory CSV files",
                        "run one of the reproduction experiments and write its tables"};
  for (int i = 0; i < 4; ++i) add_common(app.add_subcommand(names[i], help[i]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  sheafid_command_options opts{};
  const std::string chosen = app.get_subcommands().front()->get_name();
  if (sheafid_command_from_name(chosen.c_str(), &opts.command) != SHEAFID_OK) {
    std::fprintf(stderr, "error: %s\n", sheafid_last_error());
    return 1;
  }
  opts.config_path = flags.config.empty() ? nullptr : flags.config.c_str();
  opts.output_dir = flags.out.empty() ? nullptr : flags.out.c_str();
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) {
      opts.has_seed = 1;
      opts.seed = flags.seed;
    }
  }

  char* summary = nullptr;
  char* error = nullptr;
  const int code = sheafid_run_command(&opts, &summary, &error);
  if (!flags.quiet && summary && *summary) std::fputs(summary, stdout);
  if (code != 0 && error && *error) std::fprintf(stderr, "error: %s\n", error);
  sheafid_string_free(summary);
  sheafid_string_free(error);
  return code;
}
