#include "urlr/eval.hpp"

#include <string>

#include "urlr/error.hpp"

namespace urlr {

namespace {

struct PairTally {
  double concordant = 0.0;
  double discordant = 0.0;
  double tied = 0.0;
  std::size_t n = 0;

  void add(double pred_diff, double truth_diff) {
    if (truth_diff == 0.0) return;
    ++n;
    if (pred_diff == 0.0) {
      tied += 1.0;
    } else if ((pred_diff > 0.0) == (truth_diff > 0.0)) {
      concordant += 1.0;
    } else {
      discordant += 1.0;
    }
  }

  KendallResult result() const {
    if (n == 0) throw ValidationError("no pair with a strict ground-truth preference to evaluate");
    const auto total = static_cast<double>(n);
    return {(discordant + 0.5 * tied) / total, (concordant - discordant) / total, n};
  }
};

void check_scores(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size()) {
    throw ValidationError("predicted scores cover " + std::to_string(pred.size()) +
                          " items but the truth covers " + std::to_string(truth.size()));
  }
  if (pred.size() < 2) throw ValidationError("Kendall distance needs at least 2 items");
  if (!pred.allFinite() || !truth.allFinite()) throw ValidationError("scores must be finite");
}

}  // namespace

KendallResult kendall(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check_scores(pred, truth);
  PairTally tally;
  const Eigen::Index n = pred.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) tally.add(pred(i) - pred(j), truth(i) - truth(j));
  }
  return tally.result();
}

KendallResult kendall_on_pairs(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
                               std::span<const std::pair<NodeId, NodeId>> pairs) {
  check_scores(pred, truth);
  PairTally tally;
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= pred.size() || b >= pred.size()) {
      throw ValidationError("evaluation pair (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") is out of range");
    }
    tally.add(pred(a) - pred(b), truth(a) - truth(b));
  }
  return tally.result();
}

double kendall_distance(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return kendall(pred, truth).distance;
}

double kendall_correlation(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return kendall(pred, truth).correlation;
}

RocCurve outlier_roc(const OutlierPath& path, const EdgeMask& truth_outliers) {
  const std::size_t n = truth_outliers.size();
  if (path.order.size() != n || static_cast<std::size_t>(path.activation_lambda.size()) != n) {
    throw ValidationError("outlier order covers " + std::to_string(path.order.size()) +
                          " edges but the truth covers " + std::to_string(n));
  }
  std::size_t positives = 0;
  for (auto t : truth_outliers) positives += t ? 1 : 0;
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("ROC needs at least one true outlier and one inlier");
  }

  RocCurve curve;
  curve.points.push_back({0, 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t k = 0;
  auto emit = [&] {
    const RocPoint prev = curve.points.back();
    const RocPoint next{k, double(tp) / double(positives), double(fp) / double(negatives)};
    curve.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    curve.points.push_back(next);
  };
  while (k < n && path.activated(path.order[k])) {
    (truth_outliers[std::size_t(path.order[k])] ? tp : fp) += 1;
    ++k;
    emit();
  }
  if (k < n) {
    // Never-activated tail: one tied block.
    for (; k < n; ++k) (truth_outliers[std::size_t(path.order[k])] ? tp : fp) += 1;
    emit();
  }
  return curve;
}

EvalReport evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
                    const OutlierPath* path, const EdgeMask* truth_outliers) {
  const KendallResult k = kendall(pred, truth);
  EvalReport report;
  report.kendall_distance = k.distance;
  report.kendall_correlation = k.correlation;
  report.n_pairs_evaluated = k.n_pairs;
  if (path != nullptr && truth_outliers != nullptr) {
    RocCurve roc = outlier_roc(*path, *truth_outliers);
    report.auc = roc.auc;
    report.tpr_fpr = std::move(roc.points);
  }
  return report;
}

}  // namespace urlr
