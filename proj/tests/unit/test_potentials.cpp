#include "doctest.h"
#include "helpers.hpp"

#include "sheafid/error.hpp"
#include "sheafid/potentials.hpp"

using namespace sheafid;
using testutil::random_vec;

namespace {

// One instance of every kind on the given sheaf.
std::vector<PotentialModel> all_kinds(std::mt19937_64& rng, const Sheaf& s) {
  const auto n = static_cast<Eigen::Index>(s.d1());
  std::vector<std::size_t> neg;
  if (s.graph.edge_count() > 0) neg.push_back(0);
  return {PotentialModel::quadratic(),
          PotentialModel::shifted_quadratic(random_vec(rng, n)),
          PotentialModel::bounded_confidence(1.3),
          PotentialModel::antagonistic(neg),
          PotentialModel::monomial({1.0, 0.25, 0.03}),
          PotentialModel::harmonic_augmented({1.0, 0.25, 0.03, 0.5}, random_vec(rng, n))};
}

// Euclidean gradient of U by central differences.
Vec fd_gradient(const PotentialModel& m, const Sheaf& s, const Vec& y, double h = 1e-5) {
  Vec g(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    Vec p = y, q = y;
    p(i) += h;
    q(i) -= h;
    g(i) = (m.value(s, p) - m.value(s, q)) / (2 * h);
  }
  return g;
}

Mat block_diag_grams(const Sheaf& s) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(s.d1()), static_cast<Eigen::Index>(s.d1()));
  for (std::size_t e = 0; e < s.graph.edge_count(); ++e) {
    const auto o = static_cast<Eigen::Index>(s.edge_offset(e));
    m.block(o, o, s.edge_dims[e], s.edge_dims[e]) = s.edge_grams[e];
  }
  return m;
}

// Line integral of M2 * force along the straight segment a -> b by composite Simpson.
double segment_work(const PotentialModel& m, const Sheaf& s, const Mat& m2, const Vec& a, const Vec& b,
                    int panels = 200) {
  const Vec d = b - a;
  double acc = 0.0;
  for (int k = 0; k <= 2 * panels; ++k) {
    const double t = static_cast<double>(k) / (2 * panels);
    const double w = (k == 0 || k == 2 * panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * (m2 * m.force(s, a + t * d)).dot(d);
  }
  return acc / (6.0 * panels);
}

Sheaf single_edge(int dim) {
  DirectedGraph g;
  g.vertex_count = 2;
  g.edges = {{0, 1}};
  return make_uniform_sheaf(g, dim, {Mat::Identity(dim, dim)}, {Mat::Identity(dim, dim)});
}

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("bounded-confidence profile: plateau, seam and monotonicity") {
    // Plateau value and continuity at the seam.
    CHECK(bc_profile(1.5, 1.0) == doctest::Approx(1.0 / 6.0));
    CHECK(bc_profile(1.0, 1.0) == doctest::Approx(1.0 / 6.0));
    CHECK(bc_profile(1.0 - 1e-9, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
    CHECK(bc_profile(2.0, 0.7) == doctest::Approx(0.49 / 6.0));
    CHECK(bc_profile_derivative(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    // psi'(r) = r (1 - r^2/eps^2)^2 is the hand-factored oracle.
    for (double eps : {0.5, 1.0, 2.0}) {
      for (int k = 1; k < 50; ++k) {
        const double r = eps * k / 50.0;
        const double u = 1.0 - r * r / (eps * eps);
        CHECK(bc_profile_derivative(r, eps) == doctest::Approx(r * u * u).epsilon(1e-12));
        CHECK(bc_profile_derivative(r, eps) > 0.0);
      }
      CHECK(bc_profile_derivative(1.5 * eps, eps) == 0.0);
    }
  }

  TEST_CASE("bounded confidence beyond threshold contributes eps^2/6 per edge") {
    const Sheaf s = single_edge(2);
    const auto m = PotentialModel::bounded_confidence(1.0);
    Vec y(2);
    y << 1.2, -0.9;
    CHECK(m.value(s, y) == doctest::Approx(1.0 / 6.0));
    CHECK(m.force(s, y).norm() == 0.0);
    Vec at(2);
    at << 0.6, 0.8;
    CHECK(m.force(s, at).norm() < 1e-15);
    CHECK_THROWS_AS(PotentialModel::bounded_confidence(0.0), Error);
    CHECK_THROWS_AS(PotentialModel::bounded_confidence(-1.0), Error);
  }

  TEST_CASE("quadratic, shifted quadratic and monomial forces") {
    const Sheaf s = single_edge(2);
    const Vec zero = Vec::Zero(2);
    CHECK(PotentialModel::quadratic().value(s, zero) == 0.0);
    CHECK(PotentialModel::quadratic().force(s, zero).norm() == 0.0);
    Vec b(2);
    b << 0.3, -1.1;
    const auto sq = PotentialModel::shifted_quadratic(b);
    CHECK(sq.force(s, b).norm() == 0.0);
    CHECK(sq.value(s, b) == 0.0);
    const auto mono = PotentialModel::monomial({1.0, 0.25, 0.03});
    CHECK(mono.force(s, zero).norm() == 0.0);
    Vec unit(2);
    unit << 0.6, -0.8;
    CHECK((mono.force(s, unit) - 1.28 * unit).norm() < 1e-14);
    // Independent evaluation at r = 2: sum_m theta_m r^(2m-2).
    const double gain = 1.0 + 0.25 * 4.0 + 0.03 * 16.0;
    CHECK((mono.force(s, 2.0 * unit) - gain * 2.0 * unit).norm() < 1e-13);
  }

  TEST_CASE("antagonistic edges flip the force") {
    DirectedGraph g;
    g.vertex_count = 3;
    g.edges = {{0, 1}, {1, 2}};
    const Sheaf s = make_uniform_sheaf(g, 1, {Mat::Identity(1, 1), Mat::Identity(1, 1)},
                                       {Mat::Identity(1, 1), Mat::Identity(1, 1)});
    const auto m = PotentialModel::antagonistic({1});
    Vec y(2);
    y << 0.5, 0.5;
    const Vec f = m.force(s, y);
    CHECK(f(0) == doctest::Approx(0.5));
    CHECK(f(1) < 0.0);
    CHECK(m.value(s, y) == doctest::Approx(0.125 - 0.25));
    CHECK_THROWS_AS(m.force(Sheaf(single_edge(1)), Vec::Zero(1)), Error);
  }

  TEST_CASE("parameter Jacobian examples") {
    const Sheaf s = single_edge(2);
    Vec y(2);
    y << 1.0, 0.0;
    const Mat j = PotentialModel::monomial({1.0, 0.25, 0.03}).edge_param_jacobian(s, 0, y);
    REQUIRE(j.rows() == 2);
    REQUIRE(j.cols() == 3);
    for (Eigen::Index c = 0; c < 3; ++c) {
      CHECK(j(0, c) == doctest::Approx(1.0));
      CHECK(j(1, c) == doctest::Approx(0.0));
    }
    const Mat jb = PotentialModel::bounded_confidence(1.0).edge_param_jacobian(s, 0, 1.5 * y);
    CHECK(jb.norm() == 0.0);
    CHECK_THROWS_AS(PotentialModel::quadratic().edge_param_jacobian(s, 0, y), Error);
  }

  TEST_CASE("force is the Gram gradient of the value for every kind") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 12; ++trial) {
      const Sheaf s = testutil::random_sheaf(rng, 3, 4);
      const Mat m2 = block_diag_grams(s);
      for (const auto& m : all_kinds(rng, s)) {
        const Vec y = random_vec(rng, static_cast<Eigen::Index>(s.d1()), 0.4);
        const Vec expect = m2 * m.force(s, y);
        const Vec got = fd_gradient(m, s, y);
        INFO("kind = " << to_string(m.kind()));
        CHECK((got - expect).norm() <= 1e-6 * (1.0 + expect.norm()));
      }
    }
  }

  TEST_CASE("parameter Jacobian matches central differences") {
    std::mt19937_64 rng(22);
    const Sheaf s = testutil::random_sheaf(rng, 3, 3);
    std::vector<PotentialModel> models = {
        PotentialModel::bounded_confidence(1.3), PotentialModel::monomial({1.0, 0.25, 0.03}),
        PotentialModel::harmonic_augmented({1.0, 0.25, 0.03, 0.5},
                                           random_vec(rng, static_cast<Eigen::Index>(s.d1())))};
    for (const auto& m : models) {
      for (std::size_t e = 0; e < s.graph.edge_count(); ++e) {
        const Vec ye = random_vec(rng, s.edge_dims[e], 0.4);
        const Mat j = m.edge_param_jacobian(s, e, ye);
        const auto p = m.parameters();
        REQUIRE(static_cast<std::size_t>(j.cols()) == p.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
          const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
          auto up = p, dn = p;
          up[k] += h;
          dn[k] -= h;
          const Vec fd = (m.with_parameters(up).edge_force(s, e, ye) - m.with_parameters(dn).edge_force(s, e, ye)) /
                         (2 * h);
          INFO("kind = " << to_string(m.kind()) << ", param " << k);
          CHECK((fd - j.col(static_cast<Eigen::Index>(k))).norm() <= 1e-6 * (1.0 + fd.norm()));
        }
      }
    }
  }

  TEST_CASE("conservativity: work around closed loops vanishes") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 6; ++trial) {
      const Sheaf s = testutil::random_sheaf(rng, 3, 3);
      const Mat m2 = block_diag_grams(s);
      for (const auto& m : all_kinds(rng, s)) {
        const auto n = static_cast<Eigen::Index>(s.d1());
        // Small loop near the origin stays inside every bounded-confidence disk.
        const Vec a = random_vec(rng, n, 0.05);
        const Vec b = a + random_vec(rng, n, 0.05);
        const Vec c = a + random_vec(rng, n, 0.05);
        const double loop = segment_work(m, s, m2, a, b) + segment_work(m, s, m2, b, c) +
                            segment_work(m, s, m2, c, a);
        INFO("kind = " << to_string(m.kind()));
        CHECK(std::abs(loop) <= 1e-8);
        // Each leg matches the potential difference.
        CHECK(segment_work(m, s, m2, a, b) == doctest::Approx(m.value(s, b) - m.value(s, a)).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("edge separability") {
    std::mt19937_64 rng(24);
    const Sheaf s = testutil::random_sheaf(rng, 4, 5);
    for (const auto& m : all_kinds(rng, s)) {
      const Vec y = random_vec(rng, static_cast<Eigen::Index>(s.d1()), 0.5);
      const Vec f = m.force(s, y);
      for (std::size_t e = 0; e < s.graph.edge_count(); ++e) {
        Vec z = y;
        const auto o = static_cast<Eigen::Index>(s.edge_offset(e));
        z.segment(o, s.edge_dims[e]) += random_vec(rng, s.edge_dims[e], 0.3);
        const Vec g = m.force(s, z);
        for (std::size_t other = 0; other < s.graph.edge_count(); ++other) {
          if (other == e) continue;
          const auto oo = static_cast<Eigen::Index>(s.edge_offset(other));
          CHECK((g.segment(oo, s.edge_dims[other]) - f.segment(oo, s.edge_dims[other])).norm() == 0.0);
        }
      }
    }
  }

  TEST_CASE("shifted quadratic is strongly convex with minimizer b") {
    std::mt19937_64 rng(25);
    const Sheaf s = testutil::random_sheaf(rng, 3, 4);
    const Vec b = random_vec(rng, static_cast<Eigen::Index>(s.d1()));
    const auto m = PotentialModel::shifted_quadratic(b);
    CHECK(m.force(s, b).norm() < 1e-15);
    for (int k = 0; k < 20; ++k) {
      const Vec d = random_vec(rng, b.size());
      CHECK(m.value(s, b + d) > m.value(s, b));
    }
    CHECK_THROWS_AS(PotentialModel::shifted_quadratic(Vec::Zero(b.size() + 1)).force(s, b), Error);
  }

  TEST_CASE("kind names round-trip") {
    for (auto k : {PotentialKind::quadratic, PotentialKind::shifted_quadratic, PotentialKind::bounded_confidence,
                   PotentialKind::antagonistic, PotentialKind::monomial, PotentialKind::harmonic_augmented}) {
      CHECK(potential_kind_from_string(to_string(k)) == k);
    }
    CHECK_FALSE(potential_kind_from_string("cubic").has_value());
  }

  TEST_CASE("node fields") {
    const Sheaf s = single_edge(2);
    Vec anchor(4);
    anchor << 1, 2, 3, 4;
    const auto w = NodeField::quadratic_anchor(2.0, anchor);
    Vec x = Vec::Zero(4);
    CHECK(w.value(s, x) == doctest::Approx(30.0));
    CHECK((w.gradient(s, x) + 2.0 * anchor).norm() < 1e-14);
    CHECK(NodeField::zero().gradient(s, x).norm() == 0.0);
    const auto c = NodeField::custom([](std::size_t, const Vec& v) { return v.squaredNorm(); },
                                     [](std::size_t v, const Vec& xv) { return Vec(xv * static_cast<double>(v + 1)); });
    x << 1, 1, 1, 1;
    const Vec g = c.gradient(s, x);
    CHECK(g(0) == 1.0);
    CHECK(g(3) == 2.0);
    CHECK(c.value(s, x) == doctest::Approx(4.0));
  }
}
