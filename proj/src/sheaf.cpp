#include "sheafid/sheaf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sheafid/error.hpp"

namespace sheafid {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kSpdTol = 1e-14;

void check_spd(const Mat& m, int dim, const std::string& what) {
  require(m.rows() == dim && m.cols() == dim, ErrorKind::structure,
          what + ": expected " + std::to_string(dim) + "x" + std::to_string(dim) + " Gram matrix");
  require(m.allFinite(), ErrorKind::structure, what + ": non-finite Gram entry");
  if (dim == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= kSymTol * scale, ErrorKind::structure,
          what + ": Gram matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  require(lo > kSpdTol * std::max(1.0, hi), ErrorKind::structure,
          what + ": Gram matrix is not positive definite");
}

Mat block_diag(const std::vector<Mat>& blocks, std::size_t total) {
  Mat out = Mat::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  Eigen::Index at = 0;
  for (const Mat& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

Mat block_factor(const std::vector<Mat>& blocks, std::size_t total) {
  Mat out = Mat::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  Eigen::Index at = 0;
  for (const Mat& b : blocks) {
    if (b.rows() > 0) out.block(at, at, b.rows(), b.cols()) = gram_factor(b);
    at += b.rows();
  }
  return out;
}

}  // namespace

void Sheaf::validate() {
  const std::size_t nv = graph.vertex_count;
  const std::size_t ne = graph.edges.size();
  require(vertex_dims.size() == nv, ErrorKind::structure,
          "vertex_stalk_dims has " + std::to_string(vertex_dims.size()) + " entries, expected " +
              std::to_string(nv));
  require(edge_dims.size() == ne, ErrorKind::structure, "edge stalk dims do not match edge count");
  require(head_maps.size() == ne && tail_maps.size() == ne, ErrorKind::structure,
          "restriction maps do not match edge count");
  for (int d : vertex_dims) require(d >= 0, ErrorKind::structure, "negative vertex stalk dimension");
  for (int d : edge_dims) require(d >= 0, ErrorKind::structure, "negative edge stalk dimension");

  for (std::size_t e = 0; e < ne; ++e) {
    const Edge& ed = graph.edges[e];
    const std::string tag = "edge " + std::to_string(e);
    require(ed.head < nv && ed.tail < nv, ErrorKind::structure, tag + ": vertex id out of range");
    require(head_maps[e].rows() == edge_dims[e] && head_maps[e].cols() == vertex_dims[ed.head],
            ErrorKind::structure, tag + ": head map shape does not match stalks");
    require(tail_maps[e].rows() == edge_dims[e] && tail_maps[e].cols() == vertex_dims[ed.tail],
            ErrorKind::structure, tag + ": tail map shape does not match stalks");
    require(head_maps[e].allFinite() && tail_maps[e].allFinite(), ErrorKind::structure,
            tag + ": non-finite restriction map entry");
  }

  if (vertex_grams.empty()) {
    for (int d : vertex_dims) vertex_grams.push_back(Mat::Identity(d, d));
  }
  if (edge_grams.empty()) {
    for (int d : edge_dims) edge_grams.push_back(Mat::Identity(d, d));
  }
  require(vertex_grams.size() == nv, ErrorKind::structure, "vertex Gram count mismatch");
  require(edge_grams.size() == ne, ErrorKind::structure, "edge Gram count mismatch");
  for (std::size_t v = 0; v < nv; ++v) {
    check_spd(vertex_grams[v], vertex_dims[v], "vertex " + std::to_string(v));
  }
  for (std::size_t e = 0; e < ne; ++e) {
    check_spd(edge_grams[e], edge_dims[e], "edge " + std::to_string(e));
  }
}

std::size_t Sheaf::d0() const {
  std::size_t s = 0;
  for (int d : vertex_dims) s += static_cast<std::size_t>(d);
  return s;
}

std::size_t Sheaf::d1() const {
  std::size_t s = 0;
  for (int d : edge_dims) s += static_cast<std::size_t>(d);
  return s;
}

std::size_t Sheaf::vertex_offset(std::size_t v) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < v; ++i) s += static_cast<std::size_t>(vertex_dims[i]);
  return s;
}

std::size_t Sheaf::edge_offset(std::size_t e) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < e; ++i) s += static_cast<std::size_t>(edge_dims[i]);
  return s;
}

Sheaf make_uniform_sheaf(DirectedGraph graph, int dim, std::vector<Mat> head_maps,
                         std::vector<Mat> tail_maps) {
  Sheaf s;
  s.vertex_dims.assign(graph.vertex_count, dim);
  s.edge_dims.assign(graph.edges.size(), dim);
  s.graph = std::move(graph);
  s.head_maps = std::move(head_maps);
  s.tail_maps = std::move(tail_maps);
  s.validate();
  return s;
}

Mat gram_factor(const Mat& gram) {
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  require(eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0, ErrorKind::structure,
          "Gram matrix is not positive definite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal();
}

Coboundary::Coboundary(Sheaf sheaf) : sheaf_(std::move(sheaf)) {
  sheaf_.validate();
  const std::size_t n0 = sheaf_.d0();
  const std::size_t n1 = sheaf_.d1();

  std::vector<std::size_t> voff(sheaf_.graph.vertex_count);
  for (std::size_t v = 0, at = 0; v < voff.size(); ++v) {
    voff[v] = at;
    at += static_cast<std::size_t>(sheaf_.vertex_dims[v]);
  }

  b_ = Mat::Zero(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n0));
  Eigen::Index row = 0;
  for (std::size_t e = 0; e < sheaf_.graph.edges.size(); ++e) {
    const Edge& ed = sheaf_.graph.edges[e];
    const Eigen::Index rows = sheaf_.edge_dims[e];
    // Self-loops accumulate both terms into one block.
    b_.block(row, static_cast<Eigen::Index>(voff[ed.head]), rows, sheaf_.vertex_dims[ed.head]) +=
        sheaf_.head_maps[e];
    b_.block(row, static_cast<Eigen::Index>(voff[ed.tail]), rows, sheaf_.vertex_dims[ed.tail]) -=
        sheaf_.tail_maps[e];
    row += rows;
  }

  m1_ = block_diag(sheaf_.vertex_grams, n0);
  m2_ = block_diag(sheaf_.edge_grams, n1);
  l1_ = block_factor(sheaf_.vertex_grams, n0);
  l2_ = block_factor(sheaf_.edge_grams, n1);

  Mat m1_inv = Mat::Identity(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n0));
  if (n0 > 0) m1_inv = m1_.llt().solve(m1_inv);
  adjoint_ = m1_inv * b_.transpose() * m2_;

  // Bw = L2^T B L1^-T
  Mat l1_inv_t = Mat::Identity(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n0));
  if (n0 > 0) l1_inv_t = l1_.transpose().fullPivLu().solve(l1_inv_t);
  bw_ = l2_.transpose() * b_ * l1_inv_t;
  if (n0 > 0 && n1 > 0) svd_.compute(bw_, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

Vec Coboundary::apply(const Vec& x) const {
  require(static_cast<std::size_t>(x.size()) == d0(), ErrorKind::structure,
          "0-cochain has length " + std::to_string(x.size()) + ", expected " + std::to_string(d0()));
  return b_ * x;
}

Vec Coboundary::apply_adjoint(const Vec& y) const {
  require(static_cast<std::size_t>(y.size()) == d1(), ErrorKind::structure,
          "1-cochain has length " + std::to_string(y.size()) + ", expected " + std::to_string(d1()));
  return adjoint_ * y;
}

std::vector<double> Coboundary::singular_values() const {
  std::vector<double> out(std::max(d0(), d1()), 0.0);
  if (d0() > 0 && d1() > 0) {
    const Vec& s = svd_.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i);
  }
  return out;
}

std::size_t Coboundary::rank(double tol) const {
  if (d0() == 0 || d1() == 0) return 0;
  const Vec& s = svd_.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax <= 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * smax) ++r;
  }
  return r;
}

HarmonicSpace harmonic_basis(const Coboundary& op, double tol) {
  const auto n1 = static_cast<Eigen::Index>(op.d1());
  const auto r = static_cast<Eigen::Index>(op.rank(tol));
  HarmonicSpace out;
  if (n1 == 0) {
    out.basis = Mat(0, 0);
    return out;
  }
  Mat u_null;
  if (op.d0() == 0) {
    u_null = Mat::Identity(n1, n1);
  } else {
    u_null = op.svd().matrixU().rightCols(n1 - r);
  }
  // Map back from whitened coordinates: z = L2^-T u.
  out.basis = op.l2().transpose().fullPivLu().solve(u_null);
  return out;
}

Mat global_section_basis(const Coboundary& op, double tol) {
  const auto n0 = static_cast<Eigen::Index>(op.d0());
  const auto r = static_cast<Eigen::Index>(op.rank(tol));
  if (n0 == 0) return Mat(0, 0);
  Mat v_null;
  if (op.d1() == 0) {
    v_null = Mat::Identity(n0, n0);
  } else {
    v_null = op.svd().matrixV().rightCols(n0 - r);
  }
  return op.l1().transpose().fullPivLu().solve(v_null);
}

HodgeSplit hodge_project(const Coboundary& op, const HarmonicSpace& harmonic, const Vec& y) {
  require(static_cast<std::size_t>(y.size()) == op.d1(), ErrorKind::structure,
          "1-cochain length mismatch in hodge_project");
  require(static_cast<std::size_t>(harmonic.basis.rows()) == op.d1() || harmonic.dim() == 0,
          ErrorKind::structure, "harmonic basis does not belong to this coboundary");
  HodgeSplit out;
  out.harmonic = Vec::Zero(y.size());
  if (harmonic.dim() > 0) {
    const Vec coeffs = harmonic.basis.transpose() * (op.m2() * y);
    out.harmonic = harmonic.basis * coeffs;
  }
  out.exact = y - out.harmonic;
  return out;
}

Vec delta_pseudoinverse_apply(const Coboundary& op, const Vec& b, double tol) {
  require(static_cast<std::size_t>(b.size()) == op.d1(), ErrorKind::structure,
          "1-cochain length mismatch in delta_pseudoinverse_apply");
  const auto n0 = static_cast<Eigen::Index>(op.d0());
  if (n0 == 0 || op.d1() == 0) return Vec::Zero(n0);
  const auto& svd = op.svd();
  const auto r = static_cast<Eigen::Index>(op.rank(tol));
  const Vec bw = op.l2().transpose() * b;
  Vec xw = Vec::Zero(n0);
  for (Eigen::Index i = 0; i < r; ++i) {
    xw += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(bw) / svd.singularValues()(i));
  }
  return op.l1().transpose().fullPivLu().solve(xw);
}

SpectrumSummary laplacian_spectrum(const Coboundary& op, double tol) {
  SpectrumSummary s;
  s.rank = op.rank(tol);
  s.dim_h0 = op.d0() - s.rank;
  s.dim_h1 = op.d1() - s.rank;
  // Eigenvalues of delta* delta are the squared singular values of Bw.
  const std::vector<double> sv = op.singular_values();
  if (op.d0() == 0) return s;
  std::vector<double> lam(op.d0(), 0.0);
  for (std::size_t i = 0; i < std::min(sv.size(), lam.size()); ++i) lam[i] = sv[i] * sv[i];
  std::sort(lam.begin(), lam.end());
  s.lambda_min = s.dim_h0 > 0 ? 0.0 : lam.front();
  s.lambda_max = lam.back();
  s.lambda_min_nonzero = s.rank > 0 ? lam[s.dim_h0] : 0.0;
  return s;
}

}  // namespace sheafid
