#include <doctest.h>

#include <cmath>
#include <sstream>

#include "urlr/error.hpp"
#include "urlr/sweep.hpp"

using namespace urlr;

namespace {

SweepSpec small_sweep(SweepAxis axis, std::vector<double> values) {
  SweepSpec s;
  s.data.n_nodes = 15;
  s.data.flip_prob = 0.15;
  s.axis = axis;
  s.values = std::move(values);
  s.n_seeds = 3;
  s.base_seed = 100;
  return s;
}

std::string curves(const SweepSpec& spec, const SweepResult& r) {
  std::ostringstream out;
  write_curves_csv(out, spec, r);
  return out.str();
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("summary statistics use the sample standard deviation") {
    const SummaryStat s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.n == 4);
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(summarize({7.0}).std == 0.0);
    CHECK(std::isnan(summarize({}).mean));
  }

  TEST_CASE("axis values map onto the synthetic settings") {
    SweepSpec s = small_sweep(SweepAxis::error_rate, {0.3});
    CHECK(spec_at(s, 0.3, 9).flip_prob == 0.3);
    CHECK(spec_at(s, 0.3, 9).seed == 9);
    s.axis = SweepAxis::onr;
    s.data.sigma = 0.2;
    CHECK(spec_at(s, 5.0, 0).outlier_magnitude == doctest::Approx(1.0));
    s.axis = SweepAxis::density;
    CHECK(spec_at(s, 1.2, 0).graph.n_pairs == 18);
    CHECK(parse_axis("density") == SweepAxis::density);
    CHECK_THROWS_AS(parse_axis("noise"), ValidationError);
  }

  TEST_CASE("validation") {
    SweepSpec s = small_sweep(SweepAxis::prune, {});
    CHECK_THROWS_AS(run_sweep(s), ValidationError);
    s.values = {10};
    s.jobs = 0;
    CHECK_THROWS_AS(run_sweep(s), ValidationError);
    s = small_sweep(SweepAxis::density, {1.0});
    CHECK_THROWS_WITH_AS(run_sweep(s), doctest::Contains("sampled graph"), ValidationError);
  }

  TEST_CASE("prune sweep rows and summary") {
    const SweepSpec s = small_sweep(SweepAxis::prune, {0, 10, 20});
    const SweepResult r = run_sweep(s);
    REQUIRE(r.rows.size() == 3 * 3 * 3);
    CHECK(r.rows[0].method == Method::urlr);
    CHECK(r.rows[0].seed == 100);
    CHECK(r.rows[1].p == 10);
    CHECK(r.rows.back().method == Method::raw);
    for (const TrialRow& row : r.rows) {
      CHECK(row.ok());
      CHECK(row.kendall_distance >= 0.0);
      CHECK(row.auc.has_value() == (row.method != Method::raw));
    }
    CHECK(r.summary.size() == 9);
    CHECK(r.at(Method::huber_lasso_fl, 20).kendall_distance.n == 3);
    CHECK_THROWS_AS(r.at(Method::majority_vote, 20), ValidationError);
    // Raw ignores the pruning rate.
    CHECK(r.at(Method::raw, 0).kendall_distance.mean == r.at(Method::raw, 20).kendall_distance.mean);
    // The path does not depend on p, so the AUC is the same at every rate.
    CHECK(r.rows[0].auc == r.rows[2].auc);

    const std::string text = curves(s, r);
    CHECK(text.rfind(std::string(kCurvesHeader) + "\n", 0) == 0);
    CHECK(text.find("urlr,mean,prune,10,10,0.15,8,") != std::string::npos);
    CHECK(text.find(",n=3\n") != std::string::npos);
  }

  TEST_CASE("threaded sweeps reproduce the serial output byte for byte") {
    SweepSpec s = small_sweep(SweepAxis::error_rate, {0.0, 0.2});
    s.pipeline.prune_percent = 15;
    const std::string serial = curves(s, run_sweep(s));
    s.jobs = 3;
    CHECK(curves(s, run_sweep(s)) == serial);
  }

  TEST_CASE("failures are recorded per row instead of aborting") {
    SweepSpec s = small_sweep(SweepAxis::density, {0.5, 2.0});
    s.data.graph.kind = GraphKind::random_pairs;
    s.data.graph.connected = true;
    s.n_seeds = 1;
    s.methods = {Method::urlr};
    const SweepResult r = run_sweep(s);
    REQUIRE(r.rows.size() == 2);
    CHECK_FALSE(r.rows[0].ok());
    CHECK(r.rows[0].status.find("connected") != std::string::npos);
    CHECK(r.rows[1].ok());
    CHECK(r.at(Method::urlr, 0.5).kendall_distance.n == 0);

    std::ostringstream metrics;
    write_metrics_csv(metrics, r.rows);
    CHECK(metrics.str().rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  }

  TEST_CASE("held-out scoring") {
    SyntheticSpec spec;
    spec.n_nodes = 30;
    spec.theta_source = ThetaSource::linear;
    spec.feature_dim = 3;
    spec.n_test_nodes = 10;
    spec.n_test_pairs = 20;
    const SyntheticDataset d = generate(spec);
    FitResult f;
    f.model = RankModel{*d.truth_beta, kDefaultMu};
    const KendallResult k = score_ranking(f, d);
    CHECK(k.distance == 0.0);
    CHECK(k.n_pairs == 20);
    CHECK_THROWS_AS(score_ranking(FitResult{}, d), ValidationError);
  }
}
