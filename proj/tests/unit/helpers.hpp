#pragma once

#include <random>

#include "sheafid/sheaf.hpp"

namespace testutil {

using sheafid::Mat;
using sheafid::Vec;

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

inline Mat random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

inline Mat random_spd(std::mt19937_64& rng, Eigen::Index n) {
  const Mat a = random_mat(rng, n, n);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

// Random sheaf with stalk dims in [1, 3], random maps and SPD Grams.
inline sheafid::Sheaf random_sheaf(std::mt19937_64& rng, std::size_t vertices, std::size_t edges,
                                   bool identity_grams = false) {
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<std::size_t> vid(0, vertices - 1);
  sheafid::Sheaf s;
  s.graph.vertex_count = vertices;
  for (std::size_t v = 0; v < vertices; ++v) {
    s.vertex_dims.push_back(dim(rng));
    if (!identity_grams) s.vertex_grams.push_back(random_spd(rng, s.vertex_dims.back()));
  }
  for (std::size_t e = 0; e < edges; ++e) {
    sheafid::Edge ed{vid(rng), vid(rng)};
    while (ed.head == ed.tail && vertices > 1) ed.head = vid(rng);
    s.graph.edges.push_back(ed);
    const int de = dim(rng);
    s.edge_dims.push_back(de);
    s.head_maps.push_back(random_mat(rng, de, s.vertex_dims[ed.head]));
    s.tail_maps.push_back(random_mat(rng, de, s.vertex_dims[ed.tail]));
    if (!identity_grams) s.edge_grams.push_back(random_spd(rng, de));
  }
  s.validate();
  return s;
}

inline sheafid::Sheaf identity_cycle(std::size_t n, int dim = 2) {
  sheafid::DirectedGraph g;
  g.vertex_count = n;
  std::vector<Mat> h, t;
  for (std::size_t i = 0; i < n; ++i) {
    g.edges.push_back({i, (i + 1) % n});
    h.push_back(Mat::Identity(dim, dim));
    t.push_back(Mat::Identity(dim, dim));
  }
  return sheafid::make_uniform_sheaf(g, dim, h, t);
}

}  // namespace testutil
