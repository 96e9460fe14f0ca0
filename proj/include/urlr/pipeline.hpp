#pragma once

// End-to-end fitting: the joint outlier-detection/ranking method and the
// three baselines it is compared against.
//
//   urlr            outlier path on the feature-projected residual space,
//                   prune the top p%, refit beta on survivors
//   raw             beta from all edges, no outlier handling
//   majority_vote   per-pair majority filter, then beta from survivors
//   huber_lasso_fl  outlier path on the featureless (graph-only) residual
//                   space, prune the top p%, refit beta with features

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "urlr/graph.hpp"
#include "urlr/lasso_path.hpp"
#include "urlr/solver.hpp"

namespace urlr {

enum class Method { urlr, raw, majority_vote, huber_lasso_fl };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct PipelineConfig {
  double prune_percent = 20.0;
  double mu = kDefaultMu;
  std::optional<std::size_t> pca_dim;
  PathSpec path;
  Method method = Method::urlr;
  std::size_t hat_materialize_cap = 20000;

  void validate(std::size_t feature_dim) const;
  SolverOptions solver_options() const { return {mu, hat_materialize_cap}; }
};

// Featureless ranking scores, mean zero within each connected component.
struct GlobalScores {
  Eigen::VectorXd theta;
};

struct ComponentDiagnostics {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  // Cycle-space dimension |E_c| - |V_c| + 1.
  Eigen::Index dim_gamma_featureless = 0;
};

struct Diagnostics {
  std::size_t n_components = 0;
  Eigen::Index rank_x = 0;
  // |E| - |V| + (number of components).
  Eigen::Index dim_gamma_featureless = 0;
  // |E| - rank(X).
  Eigen::Index dim_gamma_urlr = 0;
  std::vector<ComponentDiagnostics> components;
};

struct FitResult {
  Method method = Method::urlr;
  std::optional<RankModel> model;
  // Empty for methods without an outlier path.
  OutlierPath outlier_order;
  // f: 1 keeps the edge, 0 marks it pruned.
  EdgeMask pruned;
  Diagnostics diagnostics;
  std::optional<GlobalScores> global_scores;
};

FitResult fit(const ComparisonGraph& g, const FeatureMatrix& phi, const PipelineConfig& cfg);

FitResult fit_urlr(const ComparisonGraph& g, const FeatureMatrix& phi, const PipelineConfig& cfg);
FitResult fit_raw(const ComparisonGraph& g, const FeatureMatrix& phi, const PipelineConfig& cfg);
FitResult fit_majority(const ComparisonGraph& g, const FeatureMatrix& phi,
                       const PipelineConfig& cfg);
FitResult fit_huber_lasso_fl(const ComparisonGraph& g, const FeatureMatrix& phi,
                             const PipelineConfig& cfg);

// One fit per pruning rate; the outlier path is computed once. Methods without
// a path ignore the rate and repeat the same fit.
std::vector<FitResult> fit_prune_grid(const ComparisonGraph& g, const FeatureMatrix& phi,
                                      const PipelineConfig& cfg,
                                      std::span<const double> p_values);

Eigen::VectorXd predict(const RankModel& model, const FeatureMatrix& phi_test);

// sqrt(W) C, the featureless design matrix.
Eigen::MatrixXd featureless_design(const ComparisonGraph& g);

// theta = (C^T W F C + mu I)^{-1} C^T W F y, centered per component.
GlobalScores featureless_scores(const ComparisonGraph& g, const EdgeMask& f,
                                double mu = kDefaultMu);

Diagnostics dimension_diagnostics(const ComparisonGraph& g, Eigen::Index rank_x);

}  // namespace urlr
