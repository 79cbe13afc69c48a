#include "doctest.h"
#include "helpers.hpp"

#include "sheafid/config.hpp"
#include "sheafid/error.hpp"

using namespace sheafid;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config was accepted: " << text);
  return ErrorKind::io;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("FNV-1a 64 reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("full document parses") {
    const RunConfig cfg = parse_run_config(R"({
      "command": "simulate",
      "sheaf": {"builtin": "cycle", "n": 5, "variant": "rotated"},
      "potential": {"kind": "monomial", "theta": [1, 0.25, 0.03]},
      "simulation": {"step": 0.02, "horizon": 3, "seed": 9, "noise_std": 0.001,
                     "initial_conditions": {"kind": "gaussian", "count": 4, "std": 0.5}},
      "output_dir": "runs"
    })");
    CHECK(cfg.command == Command::simulate);
    CHECK(cfg.sheaf.cycle_length == 5);
    CHECK(cfg.sheaf.variant == SheafVariant::rotated);
    CHECK(cfg.potential.kind == PotentialKind::monomial);
    CHECK(cfg.potential.theta.size() == 3);
    CHECK(cfg.simulation.sim.step == 0.02);
    CHECK(cfg.simulation.sim.seed == 9);
    CHECK(cfg.simulation.initial.count == 4);
    CHECK(cfg.output_dir == "runs");
    CHECK(cfg.has_sheaf);
    CHECK(cfg.has_potential);
    CHECK_FALSE(cfg.has_experiment);
  }

  TEST_CASE("unknown keys are rejected at every level") {
    CHECK(kind_of(R"({"colour": 1})") == ErrorKind::config);
    CHECK(kind_of(R"({"sheaf": {"builtin": "cycle", "m": 3}})") == ErrorKind::config);
    CHECK(kind_of(R"({"potential": {"kind": "quadratic", "gain": 2}})") == ErrorKind::config);
    CHECK(kind_of(R"({"simulation": {"dt": 0.1}})") == ErrorKind::config);
    CHECK(kind_of(R"({"simulation": {"initial_conditions": {"kind": "gaussian", "n": 3}}})") == ErrorKind::config);
    CHECK(kind_of(R"({"identify": {"data": "x"}})") == ErrorKind::config);
    CHECK(kind_of(R"({"experiment": {"id": "finite_basis", "runs": 3}})") == ErrorKind::config);
    CHECK(kind_of(R"({"node_field": {"kind": "zero", "w": 1}})") == ErrorKind::config);
  }

  TEST_CASE("invalid values are rejected") {
    CHECK(kind_of("{nope") == ErrorKind::config);
    CHECK(kind_of(R"({"command": "train"})") == ErrorKind::config);
    CHECK(kind_of(R"({"potential": {"kind": "cubic"}})") == ErrorKind::config);
    CHECK(kind_of(R"({"simulation": {"step": -1}})") == ErrorKind::config);
    CHECK(kind_of(R"({"simulation": {"seed": "x"}})") == ErrorKind::config);
    CHECK(kind_of(R"({"identify": {"residuals": "guess"}})") == ErrorKind::config);
    CHECK(kind_of(R"({"experiment": {"id": "nope"}})") == ErrorKind::config);
    CHECK(kind_of(R"({"experiment": {"id": "bounded_confidence", "cycle_lengths": [3, 5]}})") ==
          ErrorKind::config);
    CHECK(kind_of(R"({"sheaf": {"file": "a.json", "n": 3}})") == ErrorKind::config);
  }

  TEST_CASE("hash is stable, ignores output_dir and tracks content") {
    const std::string a = R"({"potential": {"kind": "bounded_confidence", "epsilon": 1.0}, "output_dir": "a"})";
    const std::string b = R"({"output_dir": "b", "potential": {"epsilon": 1, "kind": "bounded_confidence"}})";
    const std::string c = R"({"potential": {"kind": "bounded_confidence", "epsilon": 1.5}})";
    const RunConfig ca = parse_run_config(a);
    CHECK(config_hash(ca) == config_hash(parse_run_config(a)));
    CHECK(config_hash(ca) == config_hash(parse_run_config(b)));
    CHECK(config_hash(ca) != config_hash(parse_run_config(c)));
    CHECK(config_hash(ca).size() == 16);
    CHECK(config_hash(ca).find_first_not_of("0123456789abcdef") == std::string::npos);
    RunConfig seeded = ca;
    seeded.simulation.sim.seed = 5;
    CHECK(config_hash(seeded) != config_hash(ca));
    CHECK(canonical_config(ca).find("output_dir") == std::string::npos);
  }

  TEST_CASE("potential resolution broadcasts edge vectors") {
    const Sheaf s = testutil::identity_cycle(3);
    PotentialSpec spec;
    spec.kind = PotentialKind::harmonic_augmented;
    spec.theta = {1.0, 0.5};
    spec.constant_force = {1.0, 0.0};
    const PotentialModel m = resolve_potential(spec, s);
    CHECK(m.constant_force().size() == 6);
    CHECK(m.constant_force()(4) == 1.0);
    CHECK(m.constant_force()(5) == 0.0);
    spec.constant_force = {1.0, 0.0, 2.0};
    CHECK_THROWS_AS(resolve_potential(spec, s), Error);
    PotentialSpec bc;
    bc.kind = PotentialKind::bounded_confidence;
    bc.epsilon = -1.0;
    CHECK_THROWS_AS(resolve_potential(bc, s), Error);
  }

  TEST_CASE("sheaf resolution") {
    SheafSource src;
    src.cycle_length = 4;
    const Sheaf s = resolve_sheaf(src);
    CHECK(s.graph.vertex_count == 4);
    src.file = "/nonexistent/sheaf.json";
    CHECK_THROWS(resolve_sheaf(src));
  }
}
