#pragma once

// Euclidean sheaves over directed graphs, their cochain spaces and the
// coboundary operator, plus the Hodge-decomposition machinery built on a
// whitened SVD of the coboundary matrix.
//
// Flat layout: a 0-cochain concatenates the vertex blocks in vertex order, a
// 1-cochain concatenates the edge blocks in edge-list order.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace sheafid {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kDefaultRankTol = 1e-10;

struct Edge {
  std::size_t tail = 0;
  std::size_t head = 0;
};

struct DirectedGraph {
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;

  std::size_t edge_count() const { return edges.size(); }
};

// Restriction maps are stored as dim F(e) x dim F(vertex) matrices. Empty
// Gram vectors mean identity Grams; Sheaf::validate() fills them in.
struct Sheaf {
  DirectedGraph graph;
  std::vector<int> vertex_dims;
  std::vector<int> edge_dims;
  std::vector<Mat> head_maps;
  std::vector<Mat> tail_maps;
  std::vector<Mat> vertex_grams;
  std::vector<Mat> edge_grams;

  // Throws Error(structure) on shape mismatch, bad vertex ids or non-SPD Grams.
  void validate();

  std::size_t d0() const;
  std::size_t d1() const;
  std::size_t vertex_offset(std::size_t v) const;
  std::size_t edge_offset(std::size_t e) const;
};

// Sheaf with identity Grams and every stalk equal to R^dim.
Sheaf make_uniform_sheaf(DirectedGraph graph, int dim, std::vector<Mat> head_maps,
                         std::vector<Mat> tail_maps);

// Immutable matrix form of the coboundary: B (d1 x d0), the block-diagonal
// Grams M1 (C^0) and M2 (C^1), the adjoint matrix M1^-1 B^T M2, and the
// whitened SVD used for kernels, cokernels and the pseudoinverse.
class Coboundary {
 public:
  explicit Coboundary(Sheaf sheaf);

  const Sheaf& sheaf() const { return sheaf_; }
  const Mat& matrix() const { return b_; }
  const Mat& m1() const { return m1_; }
  const Mat& m2() const { return m2_; }
  const Mat& adjoint_matrix() const { return adjoint_; }
  std::size_t d0() const { return static_cast<std::size_t>(b_.cols()); }
  std::size_t d1() const { return static_cast<std::size_t>(b_.rows()); }

  Vec apply(const Vec& x) const;          // delta x
  Vec apply_adjoint(const Vec& y) const;  // delta* y

  double inner0(const Vec& a, const Vec& b) const { return a.dot(m1_ * b); }
  double inner1(const Vec& a, const Vec& b) const { return a.dot(m2_ * b); }
  double norm0_sq(const Vec& a) const { return inner0(a, a); }

  // Whitened operator Bw = L2^T B L1^-T with M = L L^T.
  const Mat& whitened() const { return bw_; }
  const Mat& l1() const { return l1_; }
  const Mat& l2() const { return l2_; }
  const Eigen::JacobiSVD<Mat>& svd() const { return svd_; }
  std::size_t rank(double tol = kDefaultRankTol) const;
  // Singular values of Bw sorted descending, padded with zeros to max(d0, d1).
  std::vector<double> singular_values() const;

 private:
  Sheaf sheaf_;
  Mat b_, m1_, m2_, adjoint_, l1_, l2_, bw_;
  Eigen::JacobiSVD<Mat> svd_;
};

struct HarmonicSpace {
  Mat basis;  // d1 x k, M2-orthonormal columns spanning ker delta*
  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
};

HarmonicSpace harmonic_basis(const Coboundary& op, double tol = kDefaultRankTol);

// M1-orthonormal basis of ker delta (the global sections), d0 x k.
Mat global_section_basis(const Coboundary& op, double tol = kDefaultRankTol);

struct HodgeSplit {
  Vec exact;     // component in im delta
  Vec harmonic;  // component in ker delta*
};

HodgeSplit hodge_project(const Coboundary& op, const HarmonicSpace& harmonic, const Vec& y);

// Minimum-M1-norm least-squares solution of delta x = b in the M2 metric.
Vec delta_pseudoinverse_apply(const Coboundary& op, const Vec& b,
                              double tol = kDefaultRankTol);

// Lower-triangular-ish factor L with M = L L^T. Cholesky first, symmetric
// eigen-factorization if the pivots fail.
Mat gram_factor(const Mat& gram);

struct SpectrumSummary {
  std::size_t dim_h0 = 0;
  std::size_t dim_h1 = 0;
  std::size_t rank = 0;
  double lambda_min = 0.0;          // smallest eigenvalue of delta* delta
  double lambda_min_nonzero = 0.0;  // spectral gap, 0 if delta = 0
  double lambda_max = 0.0;
};

SpectrumSummary laplacian_spectrum(const Coboundary& op, double tol = kDefaultRankTol);

}  // namespace sheafid
