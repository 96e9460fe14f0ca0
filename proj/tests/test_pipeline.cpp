#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "generators.hpp"
#include "urlr/error.hpp"
#include "urlr/pipeline.hpp"
#include "urlr/synth.hpp"

using namespace urlr;

namespace {

enum : NodeId { A = 0, B = 1, C = 2, D = 3, E = 4 };

std::size_t edge_of(const ComparisonGraph& g, NodeId src, NodeId dst) {
  const auto k = g.find_edge(src, dst);
  REQUIRE(k.has_value());
  return *k;
}

EdgeMask mask_pruning(const ComparisonGraph& g, std::initializer_list<std::pair<NodeId, NodeId>> edges) {
  EdgeMask f(g.n_edges(), 1);
  for (auto [s, d] : edges) f[edge_of(g, s, d)] = 0;
  return f;
}

PipelineConfig config(Method m, double p) {
  PipelineConfig cfg;
  cfg.method = m;
  cfg.prune_percent = p;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("method names round-trip") {
    for (Method m : {Method::urlr, Method::raw, Method::majority_vote, Method::huber_lasso_fl}) {
      CHECK(parse_method(to_string(m)) == m);
    }
    CHECK(parse_method("majority") == Method::majority_vote);
    CHECK(parse_method("fl") == Method::huber_lasso_fl);
    CHECK_THROWS_WITH_AS(parse_method("lasso"), doctest::Contains("unknown method 'lasso'"),
                         ValidationError);
  }

  TEST_CASE("configuration validation") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate(3));
    cfg.prune_percent = 100;
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
    cfg.prune_percent = -1;
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
    cfg = PipelineConfig{};
    cfg.pca_dim = 4;
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
    cfg.pca_dim = 0;
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
    cfg = PipelineConfig{};
    cfg.mu = 0;
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
  }

  TEST_CASE("fixture a: the outlier path isolates the wrong majority") {
    const SyntheticDataset fx = condorcet_fixture('a');
    const ComparisonGraph& g = fx.graph;
    const FitResult urlr = fit(g, fx.phi, config(Method::urlr, 50));
    CHECK(urlr.outlier_order.order.front() == Eigen::Index(edge_of(g, A, E)));
    CHECK(urlr.outlier_order.order.back() == Eigen::Index(edge_of(g, E, A)));
    CHECK(urlr.pruned == mask_pruning(g, {{A, B}, {B, C}, {C, D}, {D, E}, {A, E}}));
    CHECK(urlr.model->beta(0) > 0.0);

    const FitResult mv = fit(g, fx.phi, config(Method::majority_vote, 0));
    CHECK(mv.pruned == mask_pruning(g, {{A, B}, {B, C}, {C, D}, {D, E}, {E, A}}));
  }

  TEST_CASE("fixture b: majority voting reverses the order, the raw fit does not") {
    const SyntheticDataset fx = condorcet_fixture('b');
    const double raw = fit(fx.graph, fx.phi, config(Method::raw, 0)).model->beta(0);
    const double mv = fit(fx.graph, fx.phi, config(Method::majority_vote, 0)).model->beta(0);
    CHECK(raw > 0.0);
    CHECK(mv < 0.0);
    const FitResult urlr = fit(fx.graph, fx.phi, config(Method::urlr, 50));
    EdgeMask expected(fx.truth_outliers.size());
    for (std::size_t k = 0; k < expected.size(); ++k) expected[k] = fx.truth_outliers[k] ? 0 : 1;
    CHECK(urlr.pruned == expected);
    CHECK(urlr.model->beta(0) > 0.0);
  }

  TEST_CASE("fixture c: the lone reversed edge enters first") {
    const SyntheticDataset fx = condorcet_fixture('c');
    const FitResult urlr = fit(fx.graph, fx.phi, config(Method::urlr, 20));
    CHECK(urlr.outlier_order.order.front() == Eigen::Index(edge_of(fx.graph, A, E)));
    CHECK(urlr.pruned == mask_pruning(fx.graph, {{A, E}}));
    const FitResult mv = fit(fx.graph, fx.phi, config(Method::majority_vote, 0));
    CHECK(mv.pruned == EdgeMask(fx.graph.n_edges(), 1));
  }

  TEST_CASE("raw is bitwise the p = 0 fit") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
      const ComparisonGraph g = gen::connected_graph(rng, 12, 20);
      const FeatureMatrix phi = gen::normal_matrix(rng, 12, 3);
      const FitResult raw = fit(g, phi, config(Method::raw, 0));
      const FitResult urlr = fit(g, phi, config(Method::urlr, 0));
      CHECK(raw.model->beta == urlr.model->beta);
      CHECK(raw.outlier_order.order.empty());
      CHECK(raw.pruned == EdgeMask(g.n_edges(), 1));
    }
  }

  TEST_CASE("property: the pruned set is the prefix of the outlier order") {
    gen::Rng rng(32);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = std::size_t(gen::integer(rng, 6, 14));
      const ComparisonGraph g = gen::connected_graph(rng, n, std::size_t(gen::integer(rng, 3, 20)));
      const FeatureMatrix phi = gen::normal_matrix(rng, Eigen::Index(n), 2);
      const double p = gen::uniform(rng, 0, 99);
      for (Method m : {Method::urlr, Method::huber_lasso_fl}) {
        const FitResult r = fit(g, phi, config(m, p));
        const auto cut = std::size_t(std::floor(p * double(g.n_edges()) / 100.0 + 1e-9));
        CHECK(std::size_t(std::count(r.pruned.begin(), r.pruned.end(), 0)) == cut);
        for (std::size_t k = 0; k < r.outlier_order.order.size(); ++k) {
          CHECK(r.pruned[std::size_t(r.outlier_order.order[k])] == (k < cut ? 0 : 1));
        }
      }
    }
  }

  TEST_CASE("identity features make the two paths coincide") {
    gen::Rng rng(33);
    const ComparisonGraph g = gen::connected_graph(rng, 8, 12);
    const FeatureMatrix phi = Eigen::MatrixXd::Identity(8, 8);
    const FitResult urlr = fit(g, phi, config(Method::urlr, 25));
    const FitResult fl = fit(g, phi, config(Method::huber_lasso_fl, 25));
    CHECK(urlr.outlier_order.order == fl.outlier_order.order);
    CHECK(urlr.pruned == fl.pruned);
    CHECK(fl.global_scores.has_value());
  }

  TEST_CASE("prune grid agrees with individual fits") {
    gen::Rng rng(34);
    const ComparisonGraph g = gen::connected_graph(rng, 10, 15);
    const FeatureMatrix phi = gen::normal_matrix(rng, 10, 3);
    const std::vector<double> ps{0, 10, 35, 60};
    for (Method m : {Method::urlr, Method::huber_lasso_fl, Method::raw}) {
      const auto grid = fit_prune_grid(g, phi, config(m, 0), ps);
      REQUIRE(grid.size() == ps.size());
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const FitResult one = fit(g, phi, config(m, ps[i]));
        CHECK(grid[i].pruned == one.pruned);
        CHECK(grid[i].model->beta == one.model->beta);
      }
    }
  }

  TEST_CASE("dimension diagnostics") {
    // Two components: a triangle with a chord-free cycle and a single edge.
    const ComparisonGraph g(5, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {3, 4, 2}});
    const Diagnostics d = dimension_diagnostics(g, 1);
    CHECK(d.n_components == 2);
    CHECK(d.dim_gamma_featureless == 4 - 5 + 2);
    CHECK(d.dim_gamma_urlr == 3);
    REQUIRE(d.components.size() == 2);
    CHECK(d.components[0].n_nodes == 3);
    CHECK(d.components[0].dim_gamma_featureless == 1);
    CHECK(d.components[1].dim_gamma_featureless == 0);

    FeatureMatrix phi(5, 2);
    phi << 1, 0, 0, 1, 1, 1, 2, 0, 0, 2;
    const FitResult r = fit(g, phi, config(Method::urlr, 0));
    CHECK(r.diagnostics.rank_x == 2);
    CHECK(r.diagnostics.dim_gamma_urlr == 2);
  }

  TEST_CASE("featureless scores are centered per component and follow the edges") {
    const ComparisonGraph g(5, {{1, 0, 1}, {2, 1, 1}, {4, 3, 3}});
    const GlobalScores s = featureless_scores(g, EdgeMask(3, 1));
    CHECK(s.theta.head(3).sum() == doctest::Approx(0.0).scale(1.0));
    CHECK(s.theta.tail(2).sum() == doctest::Approx(0.0).scale(1.0));
    CHECK(s.theta(2) > s.theta(1));
    CHECK(s.theta(1) > s.theta(0));
    CHECK(s.theta(4) > s.theta(3));
    CHECK_THROWS_AS(featureless_scores(g, EdgeMask(2, 1)), ValidationError);
  }

  TEST_CASE("PCA fits report coefficients in the original feature space") {
    gen::Rng rng(35);
    const ComparisonGraph g = gen::connected_graph(rng, 20, 30);
    const FeatureMatrix phi = gen::normal_matrix(rng, 20, 5);
    PipelineConfig cfg = config(Method::urlr, 10);
    cfg.pca_dim = 2;
    const FitResult r = fit(g, phi, cfg);
    CHECK(r.model->dim() == 5);
    CHECK(predict(*r.model, phi).size() == 20);
  }

  TEST_CASE("prediction and input validation") {
    RankModel m;
    m.beta = Eigen::VectorXd::Ones(2);
    FeatureMatrix phi(3, 2);
    phi << 1, 2, 3, 4, 5, 6;
    CHECK(predict(m, phi) == Eigen::Vector3d(3, 7, 11));
    CHECK_THROWS_AS(predict(m, Eigen::MatrixXd::Ones(3, 3)), ValidationError);

    CHECK_THROWS_WITH_AS(fit(ComparisonGraph(3, {}), Eigen::MatrixXd::Ones(3, 1), PipelineConfig{}),
                         doctest::Contains("no edges"), ValidationError);
    CHECK_THROWS_AS(fit(ComparisonGraph(3, {{0, 1, 1}}), Eigen::MatrixXd::Ones(2, 1), PipelineConfig{}),
                    ValidationError);
    // A tied pair leaves nothing for majority voting.
    const ComparisonGraph tied(2, {{0, 1, 1}, {1, 0, 1}});
    CHECK_THROWS_WITH_AS(fit(tied, Eigen::MatrixXd::Identity(2, 2), config(Method::majority_vote, 0)),
                         doctest::Contains("no edges survive"), ValidationError);
  }
  TEST_CASE("unanimous votes make majority voting identical to the raw fit") {
    gen::Rng rng(36);
    const ComparisonGraph g = gen::graph(rng, 10, 20);
    // Keep one direction per pair.
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
      if (!g.find_edge(e.dst, e.src) || e.src < e.dst) edges.push_back(e);
    }
    const ComparisonGraph one_way(10, edges);
    const FeatureMatrix phi = gen::normal_matrix(rng, 10, 3);
    CHECK(fit(one_way, phi, config(Method::majority_vote, 0)).model->beta ==
          fit(one_way, phi, config(Method::raw, 0)).model->beta);
  }

  TEST_CASE("property: relabeling nodes permutes the scores") {
    gen::Rng rng(37);
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 12;
      const ComparisonGraph g = gen::connected_graph(rng, n, 15);
      const FeatureMatrix phi = gen::normal_matrix(rng, Eigen::Index(n), 3);
      std::vector<NodeId> perm(n);
      std::iota(perm.begin(), perm.end(), NodeId{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<Edge> edges;
      for (const Edge& e : g.edges()) edges.push_back({perm[std::size_t(e.src)], perm[std::size_t(e.dst)], e.weight});
      FeatureMatrix phi_p(phi.rows(), phi.cols());
      for (std::size_t i = 0; i < n; ++i) phi_p.row(perm[i]) = phi.row(Eigen::Index(i));
      const ComparisonGraph g_p(n, edges);
      for (Method m : {Method::urlr, Method::raw, Method::huber_lasso_fl}) {
        const Eigen::VectorXd s = predict(*fit(g, phi, config(m, 20)).model, phi);
        const Eigen::VectorXd s_p = predict(*fit(g_p, phi_p, config(m, 20)).model, phi_p);
        for (std::size_t i = 0; i < n; ++i) CHECK(s_p(perm[i]) == doctest::Approx(s(Eigen::Index(i))).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("property: features below the node count enlarge the outlier space") {
    gen::Rng rng(38);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = std::size_t(gen::integer(rng, 5, 20));
      const ComparisonGraph g = gen::graph(rng, n, std::size_t(gen::integer(rng, 3, 40)));
      const FeatureMatrix phi = gen::normal_matrix(rng, Eigen::Index(n), gen::integer(rng, 1, std::int64_t(n) - 1));
      const Diagnostics d = fit(g, phi, config(Method::urlr, 0)).diagnostics;
      if (d.rank_x <= Eigen::Index(n - d.n_components)) CHECK(d.dim_gamma_urlr >= d.dim_gamma_featureless);
      CHECK(d.rank_x == numerical_rank(DesignSystem(g, phi).x()));
    }
  }

  TEST_CASE("scaling beta preserves the induced order") {
    RankModel m;
    m.beta = Eigen::Vector2d(0.5, -1.0);
    gen::Rng rng(39);
    const FeatureMatrix phi = gen::normal_matrix(rng, 20, 2);
    const Eigen::VectorXd s = predict(m, phi);
    m.beta *= 7.5;
    const Eigen::VectorXd t = predict(m, phi);
    for (Eigen::Index i = 0; i < 20; ++i) {
      for (Eigen::Index j = 0; j < 20; ++j) CHECK((s(i) < s(j)) == (t(i) < t(j)));
    }
  }
}
