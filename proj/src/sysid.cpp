#include "sheafid/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sheafid/error.hpp"

namespace sheafid {

namespace {

constexpr double kUniformStepTol = 1e-6;  // relative to the first step

double uniform_step(const Trajectory& traj) {
  require(traj.size() >= 2, ErrorKind::usage, "trajectory needs at least two samples");
  const double h = traj.times[1] - traj.times[0];
  require(h > 0.0, ErrorKind::usage, "trajectory times must be strictly increasing");
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double dt = traj.times[k] - traj.times[k - 1];
    require(std::abs(dt - h) <= kUniformStepTol * h, ErrorKind::usage,
            "trajectory sampling is not uniform");
  }
  return h;
}

ResidualDataset build_dataset(const Coboundary& op, const Trajectory& traj,
                              const std::vector<Vec>& xdot, const NodeField& node_field,
                              ResidualSource source) {
  ResidualDataset data;
  data.source = source;
  data.samples.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    ResidualSample s;
    s.x = traj.states[k];
    s.r = -xdot[k];
    if (!node_field.is_zero()) s.r -= node_field.gradient(op.sheaf(), s.x);
    s.y = op.apply(s.x);
    data.samples.push_back(std::move(s));
  }
  return data;
}

// Symmetric eigen-decomposition summary of a p x p Gram matrix.
IdentifiabilityReport summarize_gram(Mat gram, double tol) {
  IdentifiabilityReport rep;
  gram = 0.5 * (gram + gram.transpose());
  rep.gram = gram;
  if (gram.rows() == 0) return rep;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  rep.lambda_min = eig.eigenvalues().minCoeff();
  rep.lambda_max = eig.eigenvalues().maxCoeff();
  rep.identifiable = rep.lambda_max > 0.0 && rep.lambda_min > tol * rep.lambda_max;
  return rep;
}

void require_samples(const ResidualDataset& data) {
  require(!data.samples.empty(), ErrorKind::usage, "residual dataset is empty");
}

// Loss of the bounded-confidence model at eps (lambda = 0).
double threshold_loss(const Coboundary& op, const ResidualDataset& data, double eps) {
  const PotentialModel model = PotentialModel::bounded_confidence(eps);
  double total = 0.0;
  for (const ResidualSample& s : data.samples) {
    const Vec diff = s.r - op.apply_adjoint(model.force(op.sheaf(), s.y));
    total += op.norm0_sq(diff);
  }
  return total / static_cast<double>(data.samples.size());
}

}  // namespace

std::string to_string(ResidualSource source) {
  return source == ResidualSource::exact ? "exact" : "finite_difference";
}

void ResidualDataset::append(const ResidualDataset& other) {
  if (samples.empty()) {
    source = other.source;
    noise_std = other.noise_std;
  }
  samples.insert(samples.end(), other.samples.begin(), other.samples.end());
}

ResidualDataset residuals_exact(const Coboundary& op, const Trajectory& traj, const NodeField& node_field) {
  require(traj.has_derivs(), ErrorKind::usage, "trajectory carries no recorded derivatives");
  return build_dataset(op, traj, traj.derivs, node_field, ResidualSource::exact);
}

std::vector<Vec> finite_difference_derivatives(const Trajectory& traj) {
  require(traj.size() >= 3, ErrorKind::usage, "finite differences need at least three samples");
  const double h = uniform_step(traj);
  const std::size_t n = traj.size();
  std::vector<Vec> d(n);
  const auto& x = traj.states;
  d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (x[k + 1] - x[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * h);
  return d;
}

ResidualDataset residuals_fd(const Coboundary& op, const Trajectory& traj, const NodeField& node_field) {
  return build_dataset(op, traj, finite_difference_derivatives(traj), node_field,
                       ResidualSource::finite_difference);
}

Mat design_matrix(const Coboundary& op, const PotentialModel& family, const ResidualDataset& data) {
  require(family.is_linear_in_parameters(), ErrorKind::usage,
          "design matrix requires a family linear in its parameters, got " + to_string(family.kind()));
  family.check_compatible(op.sheaf());
  const Sheaf& sheaf = op.sheaf();
  const auto n0 = static_cast<Eigen::Index>(op.d0());
  const auto p = static_cast<Eigen::Index>(family.parameter_count());
  Mat a(n0 * static_cast<Eigen::Index>(data.size()), p);
  Mat edge_cols(static_cast<Eigen::Index>(op.d1()), p);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec& y = data.samples[i].y;
    Eigen::Index at = 0;
    for (std::size_t e = 0; e < sheaf.graph.edges.size(); ++e) {
      const Eigen::Index d = sheaf.edge_dims[e];
      edge_cols.middleRows(at, d) = family.edge_param_jacobian(sheaf, e, y.segment(at, d));
      at += d;
    }
    a.middleRows(static_cast<Eigen::Index>(i) * n0, n0) = op.adjoint_matrix() * edge_cols;
  }
  return a;
}

IdentifiabilityReport gram_and_lambda_min(const Coboundary& op, const Mat& design, double tol) {
  const auto n0 = static_cast<Eigen::Index>(op.d0());
  require(n0 > 0 && design.rows() % n0 == 0, ErrorKind::structure,
          "design matrix rows are not a multiple of d0");
  const Eigen::Index blocks = design.rows() / n0;
  Mat gram = Mat::Zero(design.cols(), design.cols());
  for (Eigen::Index i = 0; i < blocks; ++i) {
    const auto block = design.middleRows(i * n0, n0);
    gram.noalias() += block.transpose() * op.m1() * block;
  }
  return summarize_gram(std::move(gram), tol);
}

IdentifiabilityReport information_scalar(const Coboundary& op, double epsilon,
                                         const ResidualDataset& data) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::parameter,
          "bounded-confidence threshold must be positive");
  const PotentialModel model = PotentialModel::bounded_confidence(epsilon);
  const Sheaf& sheaf = op.sheaf();
  double info = 0.0;
  Vec col(static_cast<Eigen::Index>(op.d1()));
  for (const ResidualSample& s : data.samples) {
    Eigen::Index at = 0;
    for (std::size_t e = 0; e < sheaf.graph.edges.size(); ++e) {
      const Eigen::Index d = sheaf.edge_dims[e];
      col.segment(at, d) = model.edge_param_jacobian(sheaf, e, s.y.segment(at, d)).col(0);
      at += d;
    }
    info += op.norm0_sq(op.apply_adjoint(col));
  }
  IdentifiabilityReport rep;
  rep.gram = Mat::Constant(1, 1, info);
  rep.lambda_min = info;
  rep.lambda_max = info;
  rep.identifiable = info > kInformationFloor;
  return rep;
}

double estimation_objective(const Coboundary& op, const PotentialModel& model,
                            const ResidualDataset& data, double lambda) {
  require_samples(data);
  double total = 0.0;
  for (const ResidualSample& s : data.samples) {
    const Vec diff = s.r - op.apply_adjoint(model.force(op.sheaf(), s.y));
    total += op.norm0_sq(diff);
  }
  double reg = 0.0;
  if (lambda > 0.0) {
    for (double t : model.parameters()) reg += t * t;
  }
  return total / static_cast<double>(data.samples.size()) + lambda * reg;
}

EstimationResult fit_linear(const Coboundary& op, const PotentialModel& family,
                            const ResidualDataset& data, double lambda, double tol) {
  require_samples(data);
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::parameter, "ridge weight must be >= 0");
  const Mat a = design_matrix(op, family, data);
  const auto n0 = static_cast<Eigen::Index>(op.d0());
  const auto p = a.cols();
  const auto n = static_cast<double>(data.size());

  EstimationResult res;
  res.sample_count = data.size();
  res.report = gram_and_lambda_min(op, a, tol);

  // Whitened stacking: rows L1^T A_i and L1^T r_i turn the M1 metric Euclidean.
  const Mat l1t = op.l1().transpose();
  Mat aw(a.rows(), p);
  Vec rw(a.rows());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto at = static_cast<Eigen::Index>(i) * n0;
    aw.middleRows(at, n0) = l1t * a.middleRows(at, n0);
    rw.segment(at, n0) = l1t * data.samples[i].r;
  }

  Vec theta;
  if (lambda > 0.0) {
    const Mat lhs = res.report.gram + n * lambda * Mat::Identity(p, p);
    theta = lhs.ldlt().solve(aw.transpose() * rw);
    res.effective_rank = static_cast<std::size_t>(p);
  } else {
    Eigen::BDCSVD<Mat> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    theta = Vec::Zero(p);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (smax > 0.0 && sv(i) * sv(i) > tol * smax * smax) {
        theta += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(rw) / sv(i));
        ++res.effective_rank;
      }
    }
  }
  res.theta.assign(theta.data(), theta.data() + theta.size());
  res.objective_value = estimation_objective(op, family.with_parameters(res.theta), data, lambda);
  return res;
}

EstimationResult fit_threshold(const Coboundary& op, const ResidualDataset& data,
                               const ThresholdSearch& search) {
  require_samples(data);
  require(search.lo > 0.0 && search.hi > search.lo, ErrorKind::parameter,
          "threshold bracket must satisfy 0 < lo < hi");
  require(search.grid_points >= 3, ErrorKind::parameter, "threshold grid needs at least 3 points");

  EstimationResult res;
  res.sample_count = data.size();
  const std::size_t g = search.grid_points;
  const double log_lo = std::log(search.lo);
  const double log_step = (std::log(search.hi) - log_lo) / static_cast<double>(g - 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < g; ++i) {
    const double eps = i + 1 == g ? search.hi : std::exp(log_lo + log_step * static_cast<double>(i));
    const double loss = threshold_loss(op, data, eps);
    res.grid.emplace_back(eps, loss);
    if (loss < res.grid[best].second) best = i;
  }

  double a = res.grid[best == 0 ? 0 : best - 1].first;
  double b = res.grid[std::min(best + 1, g - 1)].first;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = threshold_loss(op, data, c);
  double fd = threshold_loss(op, data, d);
  while (b - a > search.abs_tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = threshold_loss(op, data, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = threshold_loss(op, data, d);
    }
    ++res.refinement_iterations;
  }

  // Keep the best of the refined midpoint and the grid winner.
  double eps_hat = 0.5 * (a + b);
  double loss_hat = threshold_loss(op, data, eps_hat);
  if (res.grid[best].second < loss_hat) {
    eps_hat = res.grid[best].first;
    loss_hat = res.grid[best].second;
  }
  res.theta = {eps_hat};
  res.objective_value = loss_hat;
  res.report = information_scalar(op, eps_hat, data);
  res.effective_rank = res.report.identifiable ? 1 : 0;
  return res;
}

double integrated_residual_objective(const Coboundary& op, const PotentialModel& model,
                                     const NodeField& node_field, const Trajectory& traj) {
  require(traj.size() >= 2, ErrorKind::usage, "integrated residual needs at least two samples");
  uniform_step(traj);
  auto drift = [&](const Vec& x) {
    Vec g = laplacian_apply(op, model, x);
    if (!node_field.is_zero()) g += node_field.gradient(op.sheaf(), x);
    return g;
  };
  double total = 0.0;
  Vec g_prev = drift(traj.states[0]);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const Vec g_next = drift(traj.states[k + 1]);
    const double h = traj.times[k + 1] - traj.times[k];
    const Vec res = traj.states[k + 1] - traj.states[k] + 0.5 * h * (g_prev + g_next);
    total += op.norm0_sq(res);
    g_prev = g_next;
  }
  return total;
}

}  // namespace sheafid
