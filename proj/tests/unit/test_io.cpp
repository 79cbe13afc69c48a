#include "doctest.h"
#include "helpers.hpp"

#include <sstream>

#include "sheafid/error.hpp"
#include "sheafid/io.hpp"

using namespace sheafid;

namespace {

bool same_bits(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

const char* kPath = R"({
  "vertex_count": 2,
  "vertex_stalk_dims": [2, 2],
  "edges": [{"tail": 0, "head": 1, "dim": 2, "head_map": [1, 0, 0, 1], "tail_map": [1, 0, 0, 1]}]
})";

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("sheaf round trip is bit-identical") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 10; ++trial) {
      const Sheaf s = testutil::random_sheaf(rng, 3, 4);
      const std::string text = serialize_sheaf(s);
      const Sheaf back = parse_sheaf(text);
      CHECK(serialize_sheaf(back) == text);
      REQUIRE(back.graph.edges.size() == s.graph.edges.size());
      for (std::size_t e = 0; e < s.graph.edges.size(); ++e) {
        CHECK(back.graph.edges[e].head == s.graph.edges[e].head);
        CHECK(back.graph.edges[e].tail == s.graph.edges[e].tail);
        CHECK(same_bits(back.head_maps[e], s.head_maps[e]));
        CHECK(same_bits(back.tail_maps[e], s.tail_maps[e]));
        CHECK(same_bits(back.edge_grams[e], s.edge_grams[e]));
      }
      for (std::size_t v = 0; v < s.vertex_dims.size(); ++v) CHECK(same_bits(back.vertex_grams[v], s.vertex_grams[v]));
    }
  }

  TEST_CASE("omitted Grams default to identity") {
    const Sheaf s = parse_sheaf(kPath);
    CHECK(s.vertex_grams.size() == 2);
    CHECK(same_bits(s.edge_grams[0], Mat::Identity(2, 2)));
    const Coboundary op(s);
    CHECK(harmonic_basis(op).dim() == 0);
  }

  TEST_CASE("malformed sheaf files are rejected") {
    const std::string base = kPath;
    auto with = [&](const std::string& from, const std::string& to) {
      std::string t = base;
      t.replace(t.find(from), from.size(), to);
      return t;
    };
    CHECK_THROWS_AS(parse_sheaf("{not json"), Error);
    CHECK_THROWS_AS(parse_sheaf("[1, 2]"), Error);
    CHECK_THROWS_AS(parse_sheaf(with("\"vertex_count\": 2", "\"vertex_count\": 2, \"colour\": 1")), Error);
    CHECK_THROWS_AS(parse_sheaf(with("\"dim\": 2", "\"dim\": 2, \"weight\": 3")), Error);
    CHECK_THROWS_AS(parse_sheaf(with("\"head\": 1", "\"head\": 4")), Error);
    CHECK_THROWS_AS(parse_sheaf(with("[1, 0, 0, 1], \"tail_map\"", "[1, 0, 0], \"tail_map\"")), Error);
    CHECK_THROWS_AS(parse_sheaf(with("\"vertex_stalk_dims\": [2, 2]", "\"vertex_stalk_dims\": [2]")), Error);
    CHECK_THROWS_AS(parse_sheaf(with("\"vertex_count\": 2", "\"format\": \"other/9\", \"vertex_count\": 2")), Error);
    try {
      parse_sheaf(with("\"vertex_count\": 2", "\"vertex_count\": 2, \"colour\": 1"));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::structure);
      CHECK(std::string(e.what()).find("colour") != std::string::npos);
    }
  }

  TEST_CASE("trajectory CSV round trip") {
    std::mt19937_64 rng(62);
    Trajectory t;
    for (int k = 0; k < 7; ++k) {
      t.times.push_back(0.01 * k);
      t.states.push_back(testutil::random_vec(rng, 4));
      t.derivs.push_back(testutil::random_vec(rng, 4));
    }
    std::ostringstream out;
    write_trajectory_csv(out, t, {{"seed", "17"}, {"config_hash", "abc"}});
    std::istringstream in(out.str());
    CsvComments comments;
    const Trajectory back = read_trajectory_csv(in, &comments);
    CHECK(comments.at("seed") == "17");
    CHECK(comments.at("config_hash") == "abc");
    REQUIRE(back.size() == t.size());
    CHECK(back.has_derivs());
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(back.times[k] == t.times[k]);
      CHECK((back.states[k].array() == t.states[k].array()).all());
      CHECK((back.derivs[k].array() == t.derivs[k].array()).all());
    }
    // Without derivative columns.
    Trajectory bare = t;
    bare.derivs.clear();
    std::ostringstream out2;
    write_trajectory_csv(out2, bare);
    std::istringstream in2(out2.str());
    CHECK_FALSE(read_trajectory_csv(in2).has_derivs());
  }

  TEST_CASE("bad trajectory CSV files") {
    auto parse = [](const std::string& text) {
      std::istringstream in(text);
      return read_trajectory_csv(in);
    };
    CHECK_THROWS_AS(parse("x0,x1\n0,1\n"), Error);
    CHECK_THROWS_AS(parse("t,x0,x1\n0,1\n"), Error);
    CHECK_THROWS_AS(parse("t,x0\n0,abc\n"), Error);
    CHECK_THROWS_AS(parse("t,x0\n0.1,1\n0.0,2\n"), Error);
    CHECK_THROWS_AS(parse("t,x0,x1,dx0\n0,1,2,3\n"), Error);
  }

  TEST_CASE("format_double keeps 17 significant digits") {
    const double v = 0.1 + 0.2;
    CHECK(std::stod(format_double(v)) == v);
    CHECK(std::stod(format_double(-1.0 / 3.0)) == -1.0 / 3.0);
  }
}
