#pragma once

// Ranking and outlier-detection metrics.
//
// Kendall distance counts discordant pairs; a pair tied in the prediction
// counts as half discordant, and a pair tied in the truth is not evaluated.
// ROC sweeps the prune cut along an outlier order; edges the path never
// activated form one tied block at the end.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "urlr/graph.hpp"
#include "urlr/lasso_path.hpp"

namespace urlr {

struct KendallResult {
  double distance = 0.0;
  // (concordant - discordant) / evaluated; equals 1 - 2 * distance.
  double correlation = 1.0;
  std::size_t n_pairs = 0;
};

// All item pairs with distinct truth scores (higher score = ranked higher).
KendallResult kendall(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);
// Only the listed item pairs.
KendallResult kendall_on_pairs(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
                               std::span<const std::pair<NodeId, NodeId>> pairs);

double kendall_distance(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);
double kendall_correlation(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

struct RocPoint {
  // Number of edges flagged as outliers at this cut.
  std::size_t threshold_rank = 0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocCurve {
  double auc = 0.0;
  // Starts at (0, 0) and ends at (1, 1).
  std::vector<RocPoint> points;
};

RocCurve outlier_roc(const OutlierPath& path, const EdgeMask& truth_outliers);

struct EvalReport {
  double kendall_distance = 0.0;
  double kendall_correlation = 1.0;
  std::size_t n_pairs_evaluated = 0;
  std::optional<double> auc;
  std::optional<std::vector<RocPoint>> tpr_fpr;
};

EvalReport evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
                    const OutlierPath* path = nullptr,
                    const EdgeMask* truth_outliers = nullptr);

}  // namespace urlr
