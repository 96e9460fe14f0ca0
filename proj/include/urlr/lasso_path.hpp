#pragma once

// Weighted LASSO regularization path for the outlier variables:
//
//   minimize_gamma  1/2 ||ytilde - Xtilde gamma||^2 + lambda * sum_e w_e |gamma_e|
//
// solved on a decreasing log-spaced lambda grid by cyclic coordinate descent
// with warm starts. Edges are ordered by the lambda at which their coefficient
// first leaves zero; earlier entry means stronger outlier evidence.

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "urlr/graph.hpp"

namespace urlr {

// Column access to a LASSO design, expressed through its Gram matrix so that
// large projected designs never need to be materialized.
class LassoDesign {
 public:
  virtual ~LassoDesign() = default;

  virtual Eigen::Index n_coords() const = 0;
  // Xtilde^T ytilde.
  virtual Eigen::VectorXd correlation() const = 0;
  // Column e of Xtilde^T Xtilde.
  virtual void gram_column(Eigen::Index e, Eigen::Ref<Eigen::VectorXd> out) const = 0;
  virtual double gram_diagonal(Eigen::Index e) const = 0;
  // Gram matrix in the form diag(diag) - V V^T, when the design has one.
  // Enables exact active-set solves at O(rank^2) per active coordinate.
  struct LowRankGram {
    Eigen::VectorXd diag;
    Eigen::MatrixXd v;
  };
  virtual const LowRankGram* low_rank_gram() const { return nullptr; }
};

// Explicit Xtilde and ytilde; the Gram matrix is formed up front.
class DenseLassoDesign final : public LassoDesign {
 public:
  DenseLassoDesign(Eigen::MatrixXd xtilde, Eigen::VectorXd ytilde);

  Eigen::Index n_coords() const override { return xtilde_.cols(); }
  Eigen::VectorXd correlation() const override { return xtilde_.transpose() * ytilde_; }
  void gram_column(Eigen::Index e, Eigen::Ref<Eigen::VectorXd> out) const override {
    out = gram_.col(e);
  }
  double gram_diagonal(Eigen::Index e) const override { return gram_(e, e); }

  const Eigen::MatrixXd& xtilde() const { return xtilde_; }
  const Eigen::VectorXd& ytilde() const { return ytilde_; }

 private:
  Eigen::MatrixXd xtilde_;
  Eigen::VectorXd ytilde_;
  Eigen::MatrixXd gram_;
};

struct PathSpec {
  std::size_t n_lambdas = 100;
  double lambda_min_ratio = 1e-3;
  // Convergence: largest per-sweep coefficient change, measured in units of
  // the coordinate's column norm.
  double cd_tolerance = 1e-7;
  std::size_t max_sweeps = 10000;
  bool keep_snapshots = false;

  void validate() const;
};

struct OutlierPath {
  // Upper end of the grid bracket in which the coefficient first became
  // nonzero (the exact entry point for the first entrant); 0 if never.
  Eigen::VectorXd activation_lambda;
  // Edge indices, most outlying first.
  std::vector<Eigen::Index> order;
  std::vector<double> lambdas;
  // Per grid lambda, when PathSpec::keep_snapshots is set.
  std::vector<Eigen::VectorXd> gamma_at;

  std::size_t size() const { return order.size(); }
  bool activated(Eigen::Index e) const { return activation_lambda(e) > 0.0; }
};

// Largest lambda with an all-zero solution: max_e |Xtilde^T ytilde|_e / w_e.
double lambda_max(const LassoDesign& design, std::span<const double> weights);

OutlierPath lasso_path(const LassoDesign& design, std::span<const double> weights,
                       const PathSpec& spec = {});
OutlierPath lasso_path(const Eigen::MatrixXd& xtilde, const Eigen::VectorXd& ytilde,
                       std::span<const double> weights, const PathSpec& spec = {});

// Solution at a single lambda, cold-started from zero unless `warm` is given.
Eigen::VectorXd lasso_solve(const LassoDesign& design, std::span<const double> weights,
                            double lambda, const PathSpec& spec = {},
                            const std::optional<Eigen::VectorXd>& warm = std::nullopt);

// Largest violation of the weighted LASSO optimality conditions at gamma.
double kkt_violation(const LassoDesign& design, std::span<const double> weights,
                     const Eigen::VectorXd& gamma, double lambda);

// Outlier indicator: 0 for the first floor(p/100 * |E|) edges of the order.
EdgeMask prune(const OutlierPath& path, double p_percent);

}  // namespace urlr
