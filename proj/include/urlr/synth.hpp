#pragma once

// Synthetic ground truth and corrupted pairwise labels.
//
// Each component draws from its own RNG stream derived from the seed, so two
// specs that differ only in, say, the error rate share the same nodes, features
// and sampled pairs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "urlr/graph.hpp"
#include "urlr/pipeline.hpp"
#include "urlr/solver.hpp"

namespace urlr {

enum class GraphKind { complete, random_pairs, per_pair_votes };
enum class ThetaSource { uniform, linear };
enum class ErrorModel { random_flip, latent_shift, unintentional_quadratic, mixed };

std::string_view to_string(GraphKind kind);
std::string_view to_string(ThetaSource source);
std::string_view to_string(ErrorModel model);
GraphKind parse_graph_kind(std::string_view name);
ThetaSource parse_theta_source(std::string_view name);
ErrorModel parse_error_model(std::string_view name);

struct GraphDesign {
  GraphKind kind = GraphKind::complete;
  // Unordered pairs to sample; for per_pair_votes, 0 means every pair.
  std::size_t n_pairs = 0;
  std::size_t votes_per_pair = 5;
  // Random pairs only: start from a random spanning tree so the graph is
  // connected, then add uniform pairs.
  bool connected = false;
};

// Flip probability a*d^2 + b*d + c for a pair whose scores, rescaled to
// [-1, 1], differ by d. The defaults average to 10% on uniform scores.
struct QuadraticCoeffs {
  double a = 0.05;
  double b = -0.2;
  double c = 0.2;
};

struct SyntheticSpec {
  std::size_t n_nodes = 30;
  // Linear source only; the uniform source uses identity features.
  std::size_t feature_dim = 5;
  GraphDesign graph;
  ThetaSource theta_source = ThetaSource::uniform;
  double sigma = 0.1;
  double outlier_magnitude = 0.8;
  double flip_prob = 0.0;
  ErrorModel error_model = ErrorModel::random_flip;
  QuadraticCoeffs quadratic;
  // Held-out nodes and pairs, linear source only.
  std::size_t n_test_nodes = 0;
  std::size_t n_test_pairs = 0;
  std::uint64_t seed = 0;

  double onr() const { return sigma > 0.0 ? outlier_magnitude / sigma : 0.0; }
  void validate() const;
};

struct SyntheticDataset {
  ComparisonGraph graph;
  FeatureMatrix phi;
  GlobalScores truth_theta;
  // Edges whose every vote was corrupted.
  EdgeMask truth_outliers;
  std::optional<Eigen::VectorXd> truth_beta;
  std::vector<AnnotationRecord> records;
  FeatureMatrix test_phi;
  Eigen::VectorXd test_theta;
  std::vector<std::pair<NodeId, NodeId>> test_pairs;
};

SyntheticDataset generate(const SyntheticSpec& spec);

double unintentional_error_prob(double delta_theta, const QuadraticCoeffs& coeffs);

// Five items A..E (ids 0..4) with true order A < B < C < D < E and 1-D
// features [1..5].
//   a: adjacent pairs split 3/1 toward the truth, A-E split 2/1 the wrong
//      way (A->E holds the majority)
//   b: majority votes form the loop A < B < C < D < E < A; filtering to the
//      majority flips the fitted order while the raw fit keeps it
//   c: one direction per pair; the correct edges carry 2 votes, A->E carries 1
SyntheticDataset condorcet_fixture(char variant);

}  // namespace urlr
