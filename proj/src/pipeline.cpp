#include "urlr/pipeline.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "urlr/error.hpp"

namespace urlr {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::urlr:
      return "urlr";
    case Method::raw:
      return "raw";
    case Method::majority_vote:
      return "majority_vote";
    case Method::huber_lasso_fl:
      return "huber_lasso_fl";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "urlr") return Method::urlr;
  if (name == "raw") return Method::raw;
  if (name == "majority_vote" || name == "majority") return Method::majority_vote;
  if (name == "huber_lasso_fl" || name == "fl") return Method::huber_lasso_fl;
  throw ValidationError("unknown method '" + std::string(name) +
                        "' (expected urlr, raw, majority_vote or huber_lasso_fl)");
}

void PipelineConfig::validate(std::size_t feature_dim) const {
  if (!(prune_percent >= 0.0 && prune_percent < 100.0)) {
    throw ValidationError("pruning rate must lie in [0, 100), got " +
                          std::to_string(prune_percent));
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be positive");
  if (pca_dim && (*pca_dim == 0 || *pca_dim > feature_dim)) {
    throw ValidationError("pca_dim " + std::to_string(*pca_dim) + " must lie in [1, " +
                          std::to_string(feature_dim) + "]");
  }
  path.validate();
}

namespace {

// Features actually used for fitting, plus the map back to the caller's space.
struct WorkingFeatures {
  FeatureMatrix phi;
  std::optional<PcaTransform> pca;

  RankModel restore(RankModel model) const {
    if (pca) model.beta = pca->lift(model.beta);
    return model;
  }
};

WorkingFeatures prepare(const ComparisonGraph& g, const FeatureMatrix& phi,
                        const PipelineConfig& cfg) {
  cfg.validate(static_cast<std::size_t>(phi.cols()));
  if (static_cast<std::size_t>(phi.rows()) != g.n_nodes()) {
    throw ValidationError("feature matrix has " + std::to_string(phi.rows()) +
                          " rows but the graph has " + std::to_string(g.n_nodes()) + " nodes");
  }
  if (g.n_edges() == 0) throw ValidationError("the comparison graph has no edges");
  WorkingFeatures out;
  if (cfg.pca_dim) {
    out.pca.emplace(phi, *cfg.pca_dim);
    out.phi = out.pca->apply(phi);
  } else {
    out.phi = phi;
  }
  return out;
}

std::vector<double> edge_weights(const ComparisonGraph& g) {
  std::vector<double> w;
  w.reserve(g.n_edges());
  for (const Edge& e : g.edges()) w.push_back(static_cast<double>(e.weight));
  return w;
}

OutlierPath empty_path() {
  OutlierPath path;
  path.activation_lambda.resize(0);
  return path;
}

}  // namespace

Eigen::MatrixXd featureless_design(const ComparisonGraph& g) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n_edges()),
                                            static_cast<Eigen::Index>(g.n_nodes()));
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const Edge& e = g.edge(k);
    const double s = std::sqrt(static_cast<double>(e.weight));
    x(Eigen::Index(k), e.src) = s;
    x(Eigen::Index(k), e.dst) = -s;
  }
  return x;
}

Diagnostics dimension_diagnostics(const ComparisonGraph& g, Eigen::Index rank_x) {
  Diagnostics d;
  const auto components = connected_components(g);
  d.n_components = components.size();
  d.rank_x = rank_x;
  const auto n_edges = static_cast<Eigen::Index>(g.n_edges());
  d.dim_gamma_featureless = n_edges - static_cast<Eigen::Index>(g.n_nodes()) +
                            static_cast<Eigen::Index>(components.size());
  d.dim_gamma_urlr = n_edges - rank_x;

  std::vector<std::size_t> component_of(g.n_nodes());
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (NodeId v : components[c]) component_of[static_cast<std::size_t>(v)] = c;
  }
  d.components.resize(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) d.components[c].n_nodes = components[c].size();
  for (const Edge& e : g.edges()) ++d.components[component_of[std::size_t(e.src)]].n_edges;
  for (auto& c : d.components) {
    c.dim_gamma_featureless = static_cast<Eigen::Index>(c.n_edges) -
                              static_cast<Eigen::Index>(c.n_nodes) + 1;
  }
  return d;
}

namespace {

// Outlier path on a residual projection, then one refit per pruning rate.
std::vector<FitResult> pruned_fits(const ComparisonGraph& g, const WorkingFeatures& work,
                                   const PipelineConfig& cfg, Method method,
                                   std::span<const double> p_values) {
  const std::vector<double> weights = edge_weights(g);
  const DesignSystem sys(g, work.phi, cfg.solver_options());
  std::optional<ResidualProjection> projection;
  if (method == Method::urlr) {
    projection.emplace(sys);
  } else {
    projection.emplace(DesignSystem::from_matrix(
        featureless_design(g),
        Eigen::Map<const Eigen::VectorXd>(weights.data(), Eigen::Index(weights.size())),
        cfg.solver_options()));
  }
  const OutlierPath path = lasso_path(*projection, weights, cfg.path);
  const Diagnostics diagnostics = dimension_diagnostics(
      g, method == Method::urlr ? projection->rank() : numerical_rank(sys.x()));

  std::vector<FitResult> fits;
  fits.reserve(p_values.size());
  for (double p : p_values) {
    PipelineConfig at = cfg;
    at.prune_percent = p;
    at.validate(static_cast<std::size_t>(work.phi.cols()));
    FitResult result;
    result.method = method;
    result.outlier_order = path;
    result.pruned = prune(path, p);
    result.model = work.restore(fit_beta_pruned(sys, result.pruned));
    result.diagnostics = diagnostics;
    if (method == Method::huber_lasso_fl) {
      result.global_scores = featureless_scores(g, result.pruned, cfg.mu);
    }
    fits.push_back(std::move(result));
  }
  return fits;
}

}  // namespace

FitResult fit_urlr(const ComparisonGraph& g, const FeatureMatrix& phi, const PipelineConfig& cfg) {
  const WorkingFeatures work = prepare(g, phi, cfg);
  const double p = cfg.prune_percent;
  return pruned_fits(g, work, cfg, Method::urlr, {&p, 1}).front();
}

FitResult fit_raw(const ComparisonGraph& g, const FeatureMatrix& phi, const PipelineConfig& cfg) {
  const WorkingFeatures work = prepare(g, phi, cfg);
  const DesignSystem sys(g, work.phi, cfg.solver_options());

  FitResult result;
  result.method = Method::raw;
  result.outlier_order = empty_path();
  result.pruned.assign(g.n_edges(), 1);
  result.model = work.restore(fit_beta(sys, Eigen::VectorXd::Zero(sys.n_edges())));
  result.diagnostics = dimension_diagnostics(g, numerical_rank(sys.x()));
  return result;
}

FitResult fit_majority(const ComparisonGraph& g, const FeatureMatrix& phi,
                       const PipelineConfig& cfg) {
  const WorkingFeatures work = prepare(g, phi, cfg);
  const EdgeMask keep = majority_vote_mask(g);
  const ComparisonGraph survivors = g.filtered(keep);
  if (survivors.n_edges() == 0) throw ValidationError("no edges survive majority voting");
  const DesignSystem sys(survivors, work.phi, cfg.solver_options());

  FitResult result;
  result.method = Method::majority_vote;
  result.outlier_order = empty_path();
  result.pruned = keep;
  result.model = work.restore(fit_beta(sys, Eigen::VectorXd::Zero(sys.n_edges())));
  const DesignSystem full(g, work.phi, cfg.solver_options());
  result.diagnostics = dimension_diagnostics(g, numerical_rank(full.x()));
  return result;
}

FitResult fit_huber_lasso_fl(const ComparisonGraph& g, const FeatureMatrix& phi,
                             const PipelineConfig& cfg) {
  const WorkingFeatures work = prepare(g, phi, cfg);
  const double p = cfg.prune_percent;
  return pruned_fits(g, work, cfg, Method::huber_lasso_fl, {&p, 1}).front();
}

std::vector<FitResult> fit_prune_grid(const ComparisonGraph& g, const FeatureMatrix& phi,
                                      const PipelineConfig& cfg,
                                      std::span<const double> p_values) {
  if (cfg.method == Method::urlr || cfg.method == Method::huber_lasso_fl) {
    const WorkingFeatures work = prepare(g, phi, cfg);
    return pruned_fits(g, work, cfg, cfg.method, p_values);
  }
  const FitResult once = fit(g, phi, cfg);
  return std::vector<FitResult>(p_values.size(), once);
}

FitResult fit(const ComparisonGraph& g, const FeatureMatrix& phi, const PipelineConfig& cfg) {
  switch (cfg.method) {
    case Method::urlr:
      return fit_urlr(g, phi, cfg);
    case Method::raw:
      return fit_raw(g, phi, cfg);
    case Method::majority_vote:
      return fit_majority(g, phi, cfg);
    case Method::huber_lasso_fl:
      return fit_huber_lasso_fl(g, phi, cfg);
  }
  throw ValidationError("unknown method");
}

Eigen::VectorXd predict(const RankModel& model, const FeatureMatrix& phi_test) {
  if (phi_test.cols() != model.dim()) {
    throw ValidationError("features have " + std::to_string(phi_test.cols()) +
                          " columns but the model has dimension " + std::to_string(model.dim()));
  }
  return phi_test * model.beta;
}

GlobalScores featureless_scores(const ComparisonGraph& g, const EdgeMask& f, double mu) {
  if (f.size() != g.n_edges()) throw ValidationError("edge mask length does not match the graph");
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    if (!f[k]) continue;
    const Edge& e = g.edge(k);
    const auto w = static_cast<double>(e.weight);
    laplacian(e.src, e.src) += w;
    laplacian(e.dst, e.dst) += w;
    laplacian(e.src, e.dst) -= w;
    laplacian(e.dst, e.src) -= w;
    rhs(e.src) += w;
    rhs(e.dst) -= w;
  }
  laplacian.diagonal().array() += mu;
  Eigen::LLT<Eigen::MatrixXd> llt(laplacian);
  if (llt.info() != Eigen::Success) throw NumericalError("graph Laplacian solve failed");
  GlobalScores scores{llt.solve(rhs)};
  for (const auto& component : connected_components(g)) {
    double mean = 0.0;
    for (NodeId v : component) mean += scores.theta(v);
    mean /= static_cast<double>(component.size());
    for (NodeId v : component) scores.theta(v) -= mean;
  }
  return scores;
}

}  // namespace urlr
