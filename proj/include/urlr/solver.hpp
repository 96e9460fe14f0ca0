#pragma once

// Weighted design system for the joint ranking/outlier model
//
//   sqrt(W) y = X beta + sqrt(W) gamma,   X = sqrt(W) C Phi,
//
// the ridge-regularized closed form for beta, and the residual-space
// projection (I - H) sqrt(W) on which outliers are identified.

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "urlr/graph.hpp"
#include "urlr/lasso_path.hpp"

namespace urlr {

// N x d, one row of features per node.
using FeatureMatrix = Eigen::MatrixXd;

inline constexpr double kDefaultMu = 1e-3;

struct SolverOptions {
  double mu = kDefaultMu;
  // Above this many edges the hat matrix is only ever applied as an operator.
  std::size_t hat_materialize_cap = 20000;
};

struct RankModel {
  Eigen::VectorXd beta;
  double mu = kDefaultMu;

  Eigen::Index dim() const { return beta.size(); }
};

class DesignSystem {
 public:
  // Row k of X is sqrt(w_k) * (phi_src(k) - phi_dst(k)).
  DesignSystem(const ComparisonGraph& g, const FeatureMatrix& phi, SolverOptions options = {});

  // Direct construction from an |E| x d matrix X and per-edge weights, for
  // systems that do not come from a graph.
  static DesignSystem from_matrix(Eigen::MatrixXd x, Eigen::VectorXd weights,
                                  SolverOptions options = {});

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& sqrt_w() const { return sqrt_w_; }
  Eigen::VectorXd y() const { return Eigen::VectorXd::Ones(x_.rows()); }
  Eigen::Index n_edges() const { return x_.rows(); }
  Eigen::Index dim() const { return x_.cols(); }
  const SolverOptions& options() const { return options_; }

 private:
  DesignSystem() = default;

  Eigen::MatrixXd x_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_w_;
  SolverOptions options_;
};

// beta = (X^T X + mu I)^{-1} X^T sqrt(W) (y - gamma).
RankModel fit_beta(const DesignSystem& sys, const Eigen::VectorXd& gamma);
// beta = (X^T F X + mu I)^{-1} X^T sqrt(W) F y with F = diag(f).
RankModel fit_beta_pruned(const DesignSystem& sys, const EdgeMask& f);

// The residual-space operator Xtilde = (I - H) sqrt(W) with H the orthogonal
// projector onto col(X), built from a thin SVD of X. Serves directly as the
// LASSO design for the outlier path.
class ResidualProjection final : public LassoDesign {
 public:
  explicit ResidualProjection(const DesignSystem& sys);

  const Eigen::VectorXd& ytilde() const { return ytilde_; }
  // Orthonormal basis of col(X), |E| x rank(X).
  const Eigen::MatrixXd& range_basis() const { return basis_; }
  Eigen::Index rank() const { return basis_.cols(); }

  Eigen::VectorXd apply_hat(const Eigen::VectorXd& v) const;
  Eigen::VectorXd xtilde_column(Eigen::Index e) const;
  // Dense forms; throw ValidationError above the materialization cap.
  Eigen::MatrixXd hat_matrix() const;
  Eigen::MatrixXd xtilde() const;

  Eigen::Index n_coords() const override { return sqrt_w_.size(); }
  Eigen::VectorXd correlation() const override;
  void gram_column(Eigen::Index e, Eigen::Ref<Eigen::VectorXd> out) const override;
  double gram_diagonal(Eigen::Index e) const override;
  const LowRankGram* low_rank_gram() const override { return &low_rank_; }

 private:
  void check_cap() const;

  Eigen::MatrixXd basis_;
  Eigen::VectorXd sqrt_w_;
  Eigen::VectorXd ytilde_;
  // W and sqrt(W) U, with U the range basis.
  LowRankGram low_rank_;
  std::size_t cap_ = 0;
};

struct HatProjection {
  Eigen::MatrixXd xtilde;
  Eigen::VectorXd ytilde;
};

// Materialized (Xtilde, ytilde).
HatProjection hat_projection(const DesignSystem& sys);

// Rank of X, with the same tolerance the projection uses.
Eigen::Index numerical_rank(const Eigen::MatrixXd& x);

// Linear PCA fitted on a feature matrix. Components have unit norm with their
// largest-magnitude entry positive.
class PcaTransform {
 public:
  PcaTransform(const FeatureMatrix& phi, std::size_t target_dim);

  FeatureMatrix apply(const FeatureMatrix& phi) const;
  // Maps coefficients in component space back to the original features; the
  // resulting scores differ from component-space scores by a constant.
  Eigen::VectorXd lift(const Eigen::VectorXd& beta) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& components() const { return components_; }
  const Eigen::VectorXd& explained_variance() const { return variance_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;
  Eigen::VectorXd variance_;
};

FeatureMatrix pca_reduce(const FeatureMatrix& phi, std::size_t target_dim);

}  // namespace urlr
