#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>

#include "generators.hpp"
#include "oracles.hpp"
#include "urlr/error.hpp"
#include "urlr/eval.hpp"

using namespace urlr;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

OutlierPath path_of(std::vector<Eigen::Index> order, std::vector<double> lambdas) {
  OutlierPath p;
  p.order = std::move(order);
  p.activation_lambda = Eigen::VectorXd::Zero(Eigen::Index(p.order.size()));
  for (std::size_t k = 0; k < p.order.size(); ++k) p.activation_lambda(p.order[k]) = lambdas[k];
  return p;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("identical and reversed orders") {
    const Eigen::VectorXd truth = vec({1, 2, 3, 4, 5});
    CHECK(kendall_distance(truth, truth) == 0.0);
    CHECK(kendall_correlation(truth, truth) == 1.0);
    CHECK(kendall_distance(-truth, truth) == 1.0);
    CHECK(kendall_correlation(-truth, truth) == -1.0);
    CHECK(kendall(truth, truth).n_pairs == 10);
  }

  TEST_CASE("one adjacent swap among four items") {
    const KendallResult r = kendall(vec({1, 3, 2, 4}), vec({1, 2, 3, 4}));
    CHECK(r.distance == doctest::Approx(1.0 / 6.0));
    CHECK(r.correlation == doctest::Approx(4.0 / 6.0));
  }

  TEST_CASE("predicted ties count half, truth ties are skipped") {
    // Pairs (0,1) tied in prediction: half discordant among 3 pairs.
    const KendallResult r = kendall(vec({1, 1, 2}), vec({1, 2, 3}));
    CHECK(r.n_pairs == 3);
    CHECK(r.distance == doctest::Approx(0.5 / 3.0));
    // Pair (0,1) tied in truth is not evaluated.
    const KendallResult s = kendall(vec({2, 1, 3}), vec({1, 1, 3}));
    CHECK(s.n_pairs == 2);
    CHECK(s.distance == 0.0);
    CHECK_THROWS_AS(kendall(vec({1, 2}), vec({3, 3})), ValidationError);
  }

  TEST_CASE("evaluation on listed pairs") {
    const std::vector<std::pair<NodeId, NodeId>> pairs{{0, 1}, {2, 3}};
    const KendallResult r = kendall_on_pairs(vec({2, 1, 3, 4}), vec({1, 2, 3, 4}), pairs);
    CHECK(r.n_pairs == 2);
    CHECK(r.distance == 0.5);
    const std::vector<std::pair<NodeId, NodeId>> bad{{0, 9}};
    CHECK_THROWS_AS(kendall_on_pairs(vec({1, 2}), vec({1, 2}), bad), ValidationError);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(kendall(vec({1}), vec({1})), ValidationError);
    CHECK_THROWS_AS(kendall(vec({1, 2}), vec({1, 2, 3})), ValidationError);
  }

  TEST_CASE("property: distance matches inversion counting and the identity") {
    gen::Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = gen::integer(rng, 2, 60);
      std::vector<double> p(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        p[std::size_t(i)] = gen::uniform(rng, 0, 1);
        t[std::size_t(i)] = gen::uniform(rng, 0, 1);
      }
      const Eigen::VectorXd pv = Eigen::Map<Eigen::VectorXd>(p.data(), n);
      const Eigen::VectorXd tv = Eigen::Map<Eigen::VectorXd>(t.data(), n);
      const KendallResult r = kendall(pv, tv);
      CHECK(r.distance == doctest::Approx(oracle::kendall_by_inversions(p, t)).epsilon(1e-12));
      CHECK(r.correlation == doctest::Approx(1.0 - 2.0 * r.distance).epsilon(1e-12));
      CHECK(r.distance >= 0.0);
      CHECK(r.distance <= 1.0);
      // Symmetric in its arguments and invariant under monotone maps.
      CHECK(kendall_distance(tv, pv) == doctest::Approx(r.distance));
      CHECK(kendall_distance(pv.array().exp().matrix() * 3.0, tv) == doctest::Approx(r.distance));
      CHECK(kendall_distance(-pv, tv) == doctest::Approx(1.0 - r.distance));
    }
  }

  TEST_CASE("ROC on a fully activated order") {
    const OutlierPath path = path_of({0, 1, 2, 3}, {4, 3, 2, 1});
    const RocCurve roc = outlier_roc(path, EdgeMask{1, 0, 1, 0});
    REQUIRE(roc.points.size() == 5);
    CHECK(roc.points[0].tpr == 0.0);
    CHECK(roc.points[0].fpr == 0.0);
    const double tpr[] = {0.5, 0.5, 1.0, 1.0};
    const double fpr[] = {0.0, 0.5, 0.5, 1.0};
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(roc.points[k + 1].threshold_rank == k + 1);
      CHECK(roc.points[k + 1].tpr == tpr[k]);
      CHECK(roc.points[k + 1].fpr == fpr[k]);
    }
    CHECK(roc.auc == 0.75);
  }

  TEST_CASE("never-activated edges form a single tied block") {
    const OutlierPath path = path_of({2, 0, 1, 3}, {5, 0, 0, 0});
    const RocCurve roc = outlier_roc(path, EdgeMask{1, 0, 1, 0});
    REQUIRE(roc.points.size() == 3);
    CHECK(roc.points[1].tpr == 0.5);
    CHECK(roc.points[2].tpr == 1.0);
    CHECK(roc.points[2].fpr == 1.0);
    // Diagonal chord from (0, 0.5) to (1, 1).
    CHECK(roc.auc == doctest::Approx(0.75));
  }

  TEST_CASE("ROC rejects degenerate truth and size mismatches") {
    const OutlierPath path = path_of({0, 1}, {2, 1});
    CHECK_THROWS_AS(outlier_roc(path, EdgeMask{0, 0}), ValidationError);
    CHECK_THROWS_AS(outlier_roc(path, EdgeMask{1, 1}), ValidationError);
    CHECK_THROWS_AS(outlier_roc(path, EdgeMask{1, 0, 0}), ValidationError);
  }

  TEST_CASE("property: AUC equals the Mann-Whitney statistic") {
    gen::Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = std::size_t(gen::integer(rng, 2, 40));
      EdgeMask truth(n);
      for (auto& t : truth) t = gen::uniform(rng, 0, 1) < 0.3 ? 1 : 0;
      truth[0] = 1;
      truth[n - 1] = 0;
      std::vector<Eigen::Index> order(n);
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      const std::size_t active = std::size_t(gen::integer(rng, 0, std::int64_t(n)));
      std::vector<double> lambdas(n, 0.0);
      for (std::size_t k = 0; k < active; ++k) lambdas[k] = double(n - k);
      const OutlierPath path = path_of(order, lambdas);
      // Outlier score: activation lambda, with the inactive tail tied at 0.
      std::vector<double> score(n);
      std::vector<int> label(n);
      for (std::size_t e = 0; e < n; ++e) {
        score[e] = path.activation_lambda(Eigen::Index(e));
        label[e] = truth[e];
      }
      const RocCurve roc = outlier_roc(path, truth);
      CHECK(roc.auc == doctest::Approx(oracle::auc_mann_whitney(score, label)).epsilon(1e-12));
      CHECK(roc.points.back().tpr == 1.0);
      CHECK(roc.points.back().fpr == 1.0);
      for (std::size_t k = 1; k < roc.points.size(); ++k) {
        CHECK(roc.points[k].tpr >= roc.points[k - 1].tpr);
        CHECK(roc.points[k].fpr >= roc.points[k - 1].fpr);
      }
    }
  }

  TEST_CASE("evaluate bundles Kendall and, when given a path, AUC") {
    const Eigen::VectorXd truth = vec({1, 2, 3});
    const EvalReport plain = evaluate(truth, truth);
    CHECK(plain.kendall_distance == 0.0);
    CHECK(plain.n_pairs_evaluated == 3);
    CHECK_FALSE(plain.auc.has_value());
    const OutlierPath path = path_of({1, 0}, {2, 1});
    const EdgeMask t{0, 1};
    const EvalReport full = evaluate(truth, truth, &path, &t);
    REQUIRE(full.auc.has_value());
    CHECK(*full.auc == 1.0);
    REQUIRE(full.tpr_fpr.has_value());
    CHECK(full.tpr_fpr->size() == 3);
  }
}
