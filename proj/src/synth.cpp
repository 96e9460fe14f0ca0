#include "urlr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "urlr/error.hpp"

namespace urlr {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::complete:
      return "complete";
    case GraphKind::random_pairs:
      return "random_pairs";
    case GraphKind::per_pair_votes:
      return "per_pair_votes";
  }
  return "unknown";
}

std::string_view to_string(ThetaSource source) {
  return source == ThetaSource::uniform ? "uniform" : "linear";
}

std::string_view to_string(ErrorModel model) {
  switch (model) {
    case ErrorModel::random_flip:
      return "random_flip";
    case ErrorModel::latent_shift:
      return "latent_shift";
    case ErrorModel::unintentional_quadratic:
      return "unintentional_quadratic";
    case ErrorModel::mixed:
      return "mixed";
  }
  return "unknown";
}

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "complete") return GraphKind::complete;
  if (name == "random_pairs") return GraphKind::random_pairs;
  if (name == "per_pair_votes") return GraphKind::per_pair_votes;
  throw ValidationError("unknown graph kind '" + std::string(name) + "'");
}

ThetaSource parse_theta_source(std::string_view name) {
  if (name == "uniform") return ThetaSource::uniform;
  if (name == "linear") return ThetaSource::linear;
  throw ValidationError("unknown theta source '" + std::string(name) + "'");
}

ErrorModel parse_error_model(std::string_view name) {
  if (name == "random_flip") return ErrorModel::random_flip;
  if (name == "latent_shift") return ErrorModel::latent_shift;
  if (name == "unintentional_quadratic") return ErrorModel::unintentional_quadratic;
  if (name == "mixed") return ErrorModel::mixed;
  throw ValidationError("unknown error model '" + std::string(name) + "'");
}

namespace {

std::size_t max_pairs(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

void SyntheticSpec::validate() const {
  if (n_nodes < 2) throw ValidationError("need at least 2 nodes");
  if (theta_source == ThetaSource::linear && feature_dim == 0) {
    throw ValidationError("linear theta source needs feature_dim >= 1");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
  if (!(outlier_magnitude >= 0.0) || !std::isfinite(outlier_magnitude)) {
    throw ValidationError("outlier magnitude must be >= 0");
  }
  if (!(flip_prob >= 0.0 && flip_prob < 1.0)) {
    throw ValidationError("flip probability must lie in [0, 1), got " + std::to_string(flip_prob));
  }
  const std::size_t limit = max_pairs(n_nodes);
  if (graph.kind != GraphKind::complete && graph.n_pairs > limit) {
    throw ValidationError("cannot draw " + std::to_string(graph.n_pairs) + " distinct pairs from " +
                          std::to_string(n_nodes) + " nodes (at most " + std::to_string(limit) + ")");
  }
  if (graph.kind == GraphKind::random_pairs) {
    if (graph.n_pairs == 0) throw ValidationError("random_pairs needs n_pairs >= 1");
    if (graph.connected && graph.n_pairs + 1 < n_nodes) {
      throw ValidationError("a connected graph on " + std::to_string(n_nodes) + " nodes needs at least " +
                            std::to_string(n_nodes - 1) + " pairs");
    }
  }
  if (graph.kind == GraphKind::per_pair_votes && graph.votes_per_pair == 0) {
    throw ValidationError("votes_per_pair must be >= 1");
  }
  if (n_test_pairs > 0) {
    if (theta_source != ThetaSource::linear) {
      throw ValidationError("held-out pairs need the linear theta source");
    }
    if (n_test_pairs > max_pairs(n_test_nodes)) {
      throw ValidationError("cannot draw " + std::to_string(n_test_pairs) + " test pairs from " +
                            std::to_string(n_test_nodes) + " test nodes");
    }
  }
}

double unintentional_error_prob(double delta_theta, const QuadraticCoeffs& coeffs) {
  const double d = std::abs(delta_theta);
  return std::clamp(coeffs.a * d * d + coeffs.b * d + coeffs.c, 0.0, 1.0);
}

namespace {

using Pair = std::pair<NodeId, NodeId>;

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

enum StreamTag : std::uint32_t { kNodes = 1, kPairs = 2, kErrors = 3, kTest = 4 };

std::vector<Pair> all_pairs(std::size_t n) {
  std::vector<Pair> pairs;
  pairs.reserve(max_pairs(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(NodeId(i), NodeId(j));
  }
  return pairs;
}

Pair ordered(NodeId a, NodeId b) { return a < b ? Pair{a, b} : Pair{b, a}; }

// m distinct unordered pairs, returned sorted.
std::vector<Pair> sample_pairs(std::size_t n, std::size_t m, bool connected, std::mt19937_64& rng) {
  std::set<Pair> chosen;
  if (connected) {
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 1; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      chosen.insert(ordered(perm[i], perm[pick(rng)]));
    }
  }
  if (2 * m > max_pairs(n)) {
    // Dense request: shuffle the complement instead of rejection sampling.
    std::vector<Pair> rest;
    for (const Pair& p : all_pairs(n)) {
      if (!chosen.count(p)) rest.push_back(p);
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    for (std::size_t k = 0; chosen.size() < m; ++k) chosen.insert(rest[k]);
  } else {
    std::uniform_int_distribution<NodeId> node(0, NodeId(n) - 1);
    while (chosen.size() < m) {
      const NodeId a = node(rng);
      const NodeId b = node(rng);
      if (a != b) chosen.insert(ordered(a, b));
    }
  }
  return {chosen.begin(), chosen.end()};
}

struct Vote {
  NodeId preferred;
  NodeId other;
  bool corrupted;
};

class VoteSampler {
 public:
  VoteSampler(const SyntheticSpec& spec, const Eigen::VectorXd& theta,
              const std::vector<Pair>& pairs)
      : spec_(spec), theta_(theta), rng_(stream(spec.seed, kErrors)) {
    const double lo = theta.minCoeff();
    const double hi = theta.maxCoeff();
    const double span = hi - lo;
    scaled_ = span > 0.0 ? Eigen::VectorXd((2.0 * (theta.array() - lo) / span - 1.0).matrix())
                         : Eigen::VectorXd::Zero(theta.size());
    if (spec.error_model == ErrorModel::mixed) {
      double mean = 0.0;
      for (const auto& [i, j] : pairs) mean += unintentional(i, j);
      mean /= static_cast<double>(std::max<std::size_t>(pairs.size(), 1));
      coin_prob_ = mean < 0.5 ? std::clamp((spec.flip_prob - mean) / (0.5 - mean), 0.0, 1.0) : 0.0;
    }
  }

  Vote vote(NodeId i, NodeId j) {
    const double diff = theta_(i) - theta_(j);
    const Pair truth = diff >= 0.0 ? Pair{i, j} : Pair{j, i};
    const Pair reversed{truth.second, truth.first};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (spec_.error_model) {
      case ErrorModel::random_flip:
        if (u(rng_) < spec_.flip_prob) return {reversed.first, reversed.second, true};
        return {truth.first, truth.second, false};
      case ErrorModel::latent_shift: {
        const bool corrupted = u(rng_) < spec_.flip_prob;
        std::normal_distribution<double> noise(0.0, 1.0);
        const double eps = spec_.sigma * noise(rng_);
        const double sign = diff >= 0.0 ? 1.0 : -1.0;
        const double z = diff + eps - (corrupted ? sign * spec_.outlier_magnitude : 0.0);
        return z >= 0.0 ? Vote{i, j, corrupted} : Vote{j, i, corrupted};
      }
      case ErrorModel::unintentional_quadratic:
        if (u(rng_) < unintentional(i, j)) return {reversed.first, reversed.second, true};
        return {truth.first, truth.second, false};
      case ErrorModel::mixed: {
        if (u(rng_) < coin_prob_) {
          const bool flip = u(rng_) < 0.5;
          const Pair p = flip ? reversed : truth;
          return {p.first, p.second, flip};
        }
        if (u(rng_) < unintentional(i, j)) return {reversed.first, reversed.second, true};
        return {truth.first, truth.second, false};
      }
    }
    throw ValidationError("unknown error model");
  }

 private:
  double unintentional(NodeId i, NodeId j) const {
    return unintentional_error_prob(scaled_(i) - scaled_(j), spec_.quadratic);
  }

  const SyntheticSpec& spec_;
  const Eigen::VectorXd& theta_;
  Eigen::VectorXd scaled_;
  std::mt19937_64 rng_;
  double coin_prob_ = 0.0;
};

FeatureMatrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix m(rows, cols);
  // Row-major fill keeps node i's features independent of later rows.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

// Marks an edge when all of its votes were corrupted.
EdgeMask mark_outliers(const ComparisonGraph& g, const std::vector<Vote>& votes) {
  std::map<Pair, std::pair<std::int64_t, std::int64_t>> tally;
  for (const Vote& v : votes) {
    auto& [bad, total] = tally[{v.preferred, v.other}];
    bad += v.corrupted ? 1 : 0;
    ++total;
  }
  EdgeMask marks(g.n_edges(), 0);
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& [bad, total] = tally.at({g.edge(k).src, g.edge(k).dst});
    marks[k] = bad == total ? 1 : 0;
  }
  return marks;
}

}  // namespace

SyntheticDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  SyntheticDataset data;

  auto node_rng = stream(spec.seed, kNodes);
  Eigen::VectorXd theta(n);
  if (spec.theta_source == ThetaSource::uniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) theta(i) = u(node_rng);
    data.phi = FeatureMatrix::Identity(n, n);
  } else {
    const auto d = static_cast<Eigen::Index>(spec.feature_dim);
    const Eigen::VectorXd beta = normal_matrix(d, 1, node_rng).col(0);
    data.phi = normal_matrix(n, d, node_rng);
    theta = data.phi * beta;
    data.truth_beta = beta;
  }
  data.truth_theta.theta = theta;

  auto pair_rng = stream(spec.seed, kPairs);
  std::vector<Pair> pairs;
  std::size_t votes_per_pair = 1;
  switch (spec.graph.kind) {
    case GraphKind::complete:
      pairs = all_pairs(spec.n_nodes);
      break;
    case GraphKind::random_pairs:
      pairs = sample_pairs(spec.n_nodes, spec.graph.n_pairs, spec.graph.connected, pair_rng);
      break;
    case GraphKind::per_pair_votes:
      pairs = spec.graph.n_pairs == 0
                  ? all_pairs(spec.n_nodes)
                  : sample_pairs(spec.n_nodes, spec.graph.n_pairs, spec.graph.connected, pair_rng);
      votes_per_pair = spec.graph.votes_per_pair;
      break;
  }

  VoteSampler sampler(spec, theta, pairs);
  std::vector<Vote> votes;
  votes.reserve(pairs.size() * votes_per_pair);
  for (const auto& [i, j] : pairs) {
    for (std::size_t k = 0; k < votes_per_pair; ++k) votes.push_back(sampler.vote(i, j));
  }
  data.records.reserve(votes.size());
  for (const Vote& v : votes) data.records.push_back({v.preferred, v.other, {}});
  data.graph = build_graph(data.records, spec.n_nodes);
  data.truth_outliers = mark_outliers(data.graph, votes);

  if (spec.theta_source == ThetaSource::linear && spec.n_test_nodes > 0) {
    auto test_rng = stream(spec.seed, kTest);
    data.test_phi = normal_matrix(Eigen::Index(spec.n_test_nodes), data.phi.cols(), test_rng);
    data.test_theta = data.test_phi * *data.truth_beta;
    if (spec.n_test_pairs > 0) {
      data.test_pairs = sample_pairs(spec.n_test_nodes, spec.n_test_pairs, false, test_rng);
    }
  }
  return data;
}

SyntheticDataset condorcet_fixture(char variant) {
  enum : NodeId { A = 0, B = 1, C = 2, D = 3, E = 4 };
  const std::vector<std::pair<NodeId, NodeId>> adjacent{{B, A}, {C, B}, {D, C}, {E, D}};
  // Votes per pair: (correct direction, reversed direction).
  std::int64_t adj_right = 0, adj_wrong = 0, ae_right = 0, ae_wrong = 0;
  switch (variant) {
    case 'a':
      adj_right = 3, adj_wrong = 1, ae_right = 1, ae_wrong = 2;
      break;
    case 'b':
      adj_right = 3, adj_wrong = 1, ae_right = 3, ae_wrong = 4;
      break;
    case 'c':
      adj_right = 2, adj_wrong = 0, ae_right = 0, ae_wrong = 1;
      break;
    default:
      throw ValidationError(std::string("unknown fixture variant '") + variant + "' (expected a, b or c)");
  }

  SyntheticDataset data;
  std::vector<Vote> votes;
  auto add = [&](NodeId preferred, NodeId other, std::int64_t count, bool corrupted) {
    for (std::int64_t k = 0; k < count; ++k) votes.push_back({preferred, other, corrupted});
  };
  for (const auto& [hi, lo] : adjacent) {
    add(hi, lo, adj_right, false);
    add(lo, hi, adj_wrong, true);
  }
  add(E, A, ae_right, false);
  add(A, E, ae_wrong, true);

  for (const Vote& v : votes) data.records.push_back({v.preferred, v.other, {}});
  data.graph = build_graph(data.records, 5);
  data.phi = FeatureMatrix(5, 1);
  data.phi << 1, 2, 3, 4, 5;
  data.truth_theta.theta = data.phi.col(0);
  data.truth_beta = Eigen::VectorXd::Ones(1);
  data.truth_outliers = mark_outliers(data.graph, votes);
  return data;
}

}  // namespace urlr
