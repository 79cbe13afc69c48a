// Drives the built sheafid executable end to end.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" SHEAFID_CLI_PATH "' " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("sheafid_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path_ / name) << text; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> files_in(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

const char* kSimulate = R"({"command": "simulate",
  "potential": {"kind": "monomial", "theta": [1, 0.25, 0.03]},
  "simulation": {"horizon": 2, "seed": 3, "noise_std": 0.001,
                 "initial_conditions": {"kind": "gaussian", "count": 3, "std": 0.6}}})";

}  // namespace

TEST_CASE("cohomology of the builtin cycles") {
  TempDir tmp;
  RunResult a = run("cohomology --out a", tmp.path());
  CHECK(a.exit_code == 0);
  CHECK(a.out.find("dim H1 = 2") != std::string::npos);
  CHECK(a.out.find("dim H0 = 2") != std::string::npos);
  tmp.write("rot.json", R"({"sheaf": {"builtin": "cycle", "n": 5, "variant": "rotated"}})");
  RunResult b = run("cohomology --config rot.json --out b", tmp.path());
  CHECK(b.exit_code == 0);
  CHECK(b.out.find("dim H1 = 0") != std::string::npos);
  CHECK(files_in(tmp.path() / "b").size() == 2);
}

TEST_CASE("cohomology of a path graph read from a sheaf file") {
  TempDir tmp;
  tmp.write("path.json", R"({"vertex_count": 3, "vertex_stalk_dims": [2, 2, 2], "edges": [
    {"tail": 0, "head": 1, "dim": 2, "head_map": [1, 0, 0, 1], "tail_map": [1, 0, 0, 1]},
    {"tail": 1, "head": 2, "dim": 2, "head_map": [1, 0, 0, 1], "tail_map": [1, 0, 0, 1]}]})");
  tmp.write("cfg.json", R"({"sheaf": {"file": "path.json"}})");
  RunResult r = run("cohomology --config cfg.json --quiet --out o", tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(r.out.empty());
  const auto files = files_in(tmp.path() / "o");
  REQUIRE(files.size() == 2);
  const std::string report = slurp(files[0].extension() == ".txt" ? files[0] : files[1]);
  CHECK(report.find("dim H0 = 2") != std::string::npos);
  CHECK(report.find("dim H1 = 0") != std::string::npos);
  CHECK(report.find("# config_hash=") == 0);
}

TEST_CASE("usage errors exit with 1") {
  TempDir tmp;
  CHECK(run("", tmp.path()).exit_code == 1);
  CHECK(run("train", tmp.path()).exit_code == 1);
  CHECK(run("simulate --config missing.json", tmp.path()).exit_code == 1);
  tmp.write("unknown.json", R"({"simulation": {"horizon": 1, "colour": 2}})");
  RunResult u = run("simulate --config unknown.json", tmp.path());
  CHECK(u.exit_code == 1);
  CHECK(u.out.find("colour") != std::string::npos);
  tmp.write("mismatch.json", R"({"command": "identify"})");
  CHECK(run("simulate --config mismatch.json", tmp.path()).exit_code == 1);
  tmp.write("badsheaf.json", R"({"sheaf": {"file": "nope.json"}})");
  CHECK(run("cohomology --config badsheaf.json", tmp.path()).exit_code == 1);
  CHECK(run("experiment", tmp.path()).exit_code == 1);
  CHECK(run("--version", tmp.path()).exit_code == 0);
}

TEST_CASE("simulate is reproducible and seed overrides change the hash") {
  TempDir tmp;
  tmp.write("sim.json", kSimulate);
  REQUIRE(run("simulate --config sim.json --out a --quiet", tmp.path()).exit_code == 0);
  REQUIRE(run("simulate --config sim.json --out b --quiet", tmp.path()).exit_code == 0);
  const auto fa = files_in(tmp.path() / "a");
  const auto fb = files_in(tmp.path() / "b");
  REQUIRE(fa.size() == 4);  // three trajectories plus the manifest
  REQUIRE(fb.size() == fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa[i].filename() == fb[i].filename());
    CHECK(slurp(fa[i]) == slurp(fb[i]));
  }
  REQUIRE(run("simulate --config sim.json --out c --seed 4 --quiet", tmp.path()).exit_code == 0);
  const auto fc = files_in(tmp.path() / "c");
  REQUIRE(fc.size() == 4);
  CHECK(fc[0].filename() != fa[0].filename());
  CHECK(slurp(fc[1]).find("# seed=4") != std::string::npos);
}

TEST_CASE("divergent simulation exits with 2 and keeps partial output") {
  TempDir tmp;
  tmp.write("div.json", R"({"potential": {"kind": "antagonistic", "negative_edges": [0, 1, 2]},
    "simulation": {"horizon": 200, "initial_conditions": {"kind": "gaussian", "count": 2, "std": 0.3}}})");
  RunResult r = run("simulate --config div.json --out d", tmp.path());
  CHECK(r.exit_code == 2);
  const auto files = files_in(tmp.path() / "d");
  CHECK(files.size() == 3);
  bool flagged = false;
  for (const auto& f : files)
    if (f.extension() == ".csv") flagged = flagged || slurp(f).find("# diverged=true") != std::string::npos;
  CHECK(flagged);
}

TEST_CASE("identify on simulated data") {
  TempDir tmp;
  tmp.write("sim.json", R"({"potential": {"kind": "monomial", "theta": [1, 0.25, 0.03]},
    "simulation": {"horizon": 2, "seed": 5, "initial_conditions": {"kind": "gaussian", "count": 4, "std": 0.6}},
    "output_dir": "data"})");
  REQUIRE(run("simulate --config sim.json --quiet", tmp.path()).exit_code == 0);

  tmp.write("fit.json", R"({"potential": {"kind": "monomial", "theta": [0, 0, 0]},
    "identify": {"data_dir": "data", "residuals": "observed"}, "output_dir": "fit"})");
  RunResult fit = run("identify --config fit.json", tmp.path());
  CHECK(fit.exit_code == 0);
  CHECK(fit.out.find("identifiable = yes") != std::string::npos);
  auto files = files_in(tmp.path() / "fit");
  REQUIRE(files.size() == 1);
  const std::string est = slurp(files[0]);
  CHECK(est.find("\"identifiable\": true") != std::string::npos);
  CHECK(est.find("\"data_config_hashes\"") != std::string::npos);

  // A harmonic direction makes the family non-identifiable; that is a result, not an error.
  tmp.write("aug.json", R"({"potential": {"kind": "harmonic_augmented", "theta": [0, 0, 0, 0], "c": [1, 0]},
    "identify": {"data_dir": "data", "residuals": "observed"}, "output_dir": "aug"})");
  RunResult aug = run("identify --config aug.json", tmp.path());
  CHECK(aug.exit_code == 0);
  CHECK(aug.out.find("identifiable = no") != std::string::npos);

  // Empty or missing data directories are usage errors.
  fs::create_directories(tmp.path() / "empty");
  tmp.write("none.json", R"({"potential": {"kind": "monomial", "theta": [0, 0, 0]},
    "identify": {"data_dir": "empty"}, "output_dir": "none"})");
  CHECK(run("identify --config none.json", tmp.path()).exit_code == 1);
  tmp.write("nodir.json", R"({"potential": {"kind": "monomial", "theta": [0, 0, 0]}})");
  CHECK(run("identify --config nodir.json", tmp.path()).exit_code == 1);
}

TEST_CASE("experiment tables are byte-identical across reruns") {
  TempDir tmp;
  tmp.write("exp.json", R"({"experiment": {"id": "formation_transfer", "seeds": [0, 1]}})");
  RunResult a = run("experiment --config exp.json --out a", tmp.path());
  RunResult b = run("experiment --config exp.json --out b", tmp.path());
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  const auto fa = files_in(tmp.path() / "a");
  const auto fb = files_in(tmp.path() / "b");
  REQUIRE(!fa.empty());
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(slurp(fa[i]) == slurp(fb[i]));
  bool has_table = false;
  for (const auto& f : fa) has_table = has_table || f.filename().string().find("table1_formation_transfer") != std::string::npos;
  CHECK(has_table);
}
