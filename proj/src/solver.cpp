#include "urlr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "urlr/error.hpp"

namespace urlr {

namespace {

void check_options(const SolverOptions& options) {
  if (!(options.mu > 0.0) || !std::isfinite(options.mu)) {
    throw ValidationError("ridge parameter mu must be positive and finite");
  }
}

// Singular values above this fraction of the largest count toward the rank.
double rank_tolerance(const Eigen::MatrixXd& x, double largest) {
  return largest * static_cast<double>(std::max(x.rows(), x.cols())) *
         std::numeric_limits<double>::epsilon();
}

Eigen::Index rank_from(const Eigen::VectorXd& singular, const Eigen::MatrixXd& x) {
  if (singular.size() == 0 || singular(0) <= 0.0) return 0;
  const double tol = rank_tolerance(x, singular(0));
  Eigen::Index r = 0;
  while (r < singular.size() && singular(r) > tol) ++r;
  return r;
}

RankModel ridge_solve(const DesignSystem& sys, const Eigen::VectorXd& row_mask,
                      const Eigen::VectorXd& target) {
  const Eigen::MatrixXd& x = sys.x();
  const Eigen::MatrixXd masked = (x.array().colwise() * row_mask.array()).matrix();
  Eigen::MatrixXd normal = x.transpose() * masked;
  normal.diagonal().array() += sys.options().mu;
  const Eigen::VectorXd rhs = x.transpose() * target;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("normal equations are not positive definite");
  }
  RankModel model{llt.solve(rhs), sys.options().mu};
  if (!model.beta.allFinite()) throw NumericalError("ridge solve produced non-finite beta");
  return model;
}

}  // namespace

DesignSystem::DesignSystem(const ComparisonGraph& g, const FeatureMatrix& phi,
                           SolverOptions options)
    : options_(options) {
  check_options(options_);
  if (static_cast<std::size_t>(phi.rows()) != g.n_nodes()) {
    throw ValidationError("feature matrix has " + std::to_string(phi.rows()) +
                          " rows but the graph has " + std::to_string(g.n_nodes()) + " nodes");
  }
  if (!phi.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  const auto n_edges = static_cast<Eigen::Index>(g.n_edges());
  x_.resize(n_edges, phi.cols());
  weights_.resize(n_edges);
  sqrt_w_.resize(n_edges);
  for (Eigen::Index k = 0; k < n_edges; ++k) {
    const Edge& e = g.edge(static_cast<std::size_t>(k));
    weights_(k) = static_cast<double>(e.weight);
    sqrt_w_(k) = std::sqrt(weights_(k));
    x_.row(k) = sqrt_w_(k) * (phi.row(e.src) - phi.row(e.dst));
  }
}

DesignSystem DesignSystem::from_matrix(Eigen::MatrixXd x, Eigen::VectorXd weights,
                                       SolverOptions options) {
  check_options(options);
  if (x.rows() != weights.size()) {
    throw ValidationError("X has " + std::to_string(x.rows()) + " rows but " +
                          std::to_string(weights.size()) + " weights were given");
  }
  if (!x.allFinite()) throw ValidationError("X contains non-finite values");
  if ((weights.array() < 1.0).any()) throw ValidationError("edge weights must be >= 1");
  DesignSystem sys;
  sys.x_ = std::move(x);
  sys.weights_ = std::move(weights);
  sys.sqrt_w_ = sys.weights_.cwiseSqrt();
  sys.options_ = options;
  return sys;
}

RankModel fit_beta(const DesignSystem& sys, const Eigen::VectorXd& gamma) {
  if (gamma.size() != sys.n_edges()) {
    throw ValidationError("gamma has length " + std::to_string(gamma.size()) + " but there are " +
                          std::to_string(sys.n_edges()) + " edges");
  }
  if (!gamma.allFinite()) throw ValidationError("gamma contains non-finite values");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n_edges());
  return ridge_solve(sys, ones, sys.sqrt_w().cwiseProduct(sys.y() - gamma));
}

RankModel fit_beta_pruned(const DesignSystem& sys, const EdgeMask& f) {
  if (static_cast<Eigen::Index>(f.size()) != sys.n_edges()) {
    throw ValidationError("outlier indicator has length " + std::to_string(f.size()) +
                          " but there are " + std::to_string(sys.n_edges()) + " edges");
  }
  Eigen::VectorXd mask(sys.n_edges());
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    const auto v = f[static_cast<std::size_t>(k)];
    if (v > 1) throw ValidationError("outlier indicator entries must be 0 or 1");
    mask(k) = v;
  }
  if (sys.n_edges() > 0 && mask.sum() == 0.0) throw ValidationError("no inliers remain");
  return ridge_solve(sys, mask, sys.sqrt_w().cwiseProduct(mask.cwiseProduct(sys.y())));
}

ResidualProjection::ResidualProjection(const DesignSystem& sys)
    : sqrt_w_(sys.sqrt_w()), cap_(sys.options().hat_materialize_cap) {
  const Eigen::MatrixXd& x = sys.x();
  if (x.rows() > 0 && x.cols() > 0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
    basis_ = svd.matrixU().leftCols(rank_from(svd.singularValues(), x));
  } else {
    basis_.resize(x.rows(), 0);
  }
  ytilde_ = sqrt_w_ - apply_hat(sqrt_w_);
  low_rank_.diag = sqrt_w_.cwiseAbs2();
  low_rank_.v = sqrt_w_.asDiagonal() * basis_;
}

Eigen::VectorXd ResidualProjection::apply_hat(const Eigen::VectorXd& v) const {
  if (basis_.cols() == 0) return Eigen::VectorXd::Zero(v.size());
  return basis_ * (basis_.transpose() * v);
}

Eigen::VectorXd ResidualProjection::xtilde_column(Eigen::Index e) const {
  Eigen::VectorXd col = -(basis_ * basis_.row(e).transpose());
  col(e) += 1.0;
  return col * sqrt_w_(e);
}

void ResidualProjection::check_cap() const {
  if (static_cast<std::size_t>(n_coords()) > cap_) {
    throw ValidationError("refusing to materialize a " + std::to_string(n_coords()) + "^2 matrix (cap " +
                          std::to_string(cap_) + " edges)");
  }
}

Eigen::MatrixXd ResidualProjection::hat_matrix() const {
  check_cap();
  return basis_ * basis_.transpose();
}

Eigen::MatrixXd ResidualProjection::xtilde() const {
  check_cap();
  Eigen::MatrixXd out = -(basis_ * basis_.transpose());
  out.diagonal().array() += 1.0;
  return out * sqrt_w_.asDiagonal();
}

Eigen::VectorXd ResidualProjection::correlation() const {
  return sqrt_w_.cwiseProduct(ytilde_ - apply_hat(ytilde_));
}

void ResidualProjection::gram_column(Eigen::Index e, Eigen::Ref<Eigen::VectorXd> out) const {
  // Xtilde^T Xtilde = sqrt(W) (I - H) sqrt(W) because I - H is a projector.
  if (basis_.cols() > 0) {
    out.noalias() = -(basis_ * basis_.row(e).transpose());
  } else {
    out.setZero();
  }
  out(e) += 1.0;
  out = out.cwiseProduct(sqrt_w_) * sqrt_w_(e);
}

double ResidualProjection::gram_diagonal(Eigen::Index e) const {
  const double leverage = basis_.cols() > 0 ? basis_.row(e).squaredNorm() : 0.0;
  return sqrt_w_(e) * sqrt_w_(e) * std::max(0.0, 1.0 - leverage);
}

HatProjection hat_projection(const DesignSystem& sys) {
  const ResidualProjection proj(sys);
  return {proj.xtilde(), proj.ytilde()};
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& x) {
  if (x.rows() == 0 || x.cols() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
  return rank_from(svd.singularValues(), x);
}

PcaTransform::PcaTransform(const FeatureMatrix& phi, std::size_t target_dim) {
  const auto n = static_cast<std::size_t>(phi.rows());
  const auto d = static_cast<std::size_t>(phi.cols());
  if (n < 2 || target_dim < 1 || target_dim > std::min(n - 1, d)) {
    throw ValidationError("PCA target dimension " + std::to_string(target_dim) +
                          " must lie in [1, min(N-1, d)] = [1, " +
                          std::to_string(n < 2 ? 0 : std::min(n - 1, d)) + "]");
  }
  if (!phi.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  mean_ = phi.colwise().mean().transpose();
  const Eigen::MatrixXd centered = phi.rowwise() - mean_.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto k = static_cast<Eigen::Index>(target_dim);
  components_ = svd.matrixV().leftCols(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index at = 0;
    components_.col(j).cwiseAbs().maxCoeff(&at);
    if (components_(at, j) < 0.0) components_.col(j) *= -1.0;
  }
  variance_ = svd.singularValues().head(k).array().square() / static_cast<double>(n - 1);
}

FeatureMatrix PcaTransform::apply(const FeatureMatrix& phi) const {
  if (phi.cols() != mean_.size()) {
    throw ValidationError("PCA was fitted on " + std::to_string(mean_.size()) +
                          " features but got " + std::to_string(phi.cols()));
  }
  return (phi.rowwise() - mean_.transpose()) * components_;
}

Eigen::VectorXd PcaTransform::lift(const Eigen::VectorXd& beta) const {
  if (beta.size() != components_.cols()) {
    throw ValidationError("coefficient vector does not match the PCA dimension");
  }
  return components_ * beta;
}

FeatureMatrix pca_reduce(const FeatureMatrix& phi, std::size_t target_dim) {
  return PcaTransform(phi, target_dim).apply(phi);
}

}  // namespace urlr
