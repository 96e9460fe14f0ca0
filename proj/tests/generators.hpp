#pragma once

// Small random instances for property tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "urlr/graph.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::int64_t integer(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// Random directed multigraph: `m` distinct ordered pairs, weights in [1, max_w].
inline urlr::ComparisonGraph graph(Rng& rng, std::size_t n, std::size_t m, std::int64_t max_w = 3) {
  std::set<std::pair<urlr::NodeId, urlr::NodeId>> seen;
  std::vector<urlr::Edge> edges;
  const std::size_t cap = n * (n - 1);
  while (edges.size() < m && seen.size() < cap) {
    const auto a = integer(rng, 0, std::int64_t(n) - 1);
    const auto b = integer(rng, 0, std::int64_t(n) - 1);
    if (a == b || !seen.insert({a, b}).second) continue;
    edges.push_back({a, b, integer(rng, 1, max_w)});
  }
  return urlr::ComparisonGraph(n, edges);
}

// Connected: a random spanning path plus up to `extra` random edges.
inline urlr::ComparisonGraph connected_graph(Rng& rng, std::size_t n, std::size_t extra,
                                             std::int64_t max_w = 3) {
  std::vector<urlr::NodeId> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = urlr::NodeId(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<urlr::NodeId, urlr::NodeId>> seen;
  std::vector<urlr::Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    edges.push_back({perm[i - 1], perm[i], integer(rng, 1, max_w)});
    seen.insert({perm[i - 1], perm[i]});
  }
  extra = std::min(extra, n * (n - 1) - seen.size());
  while (extra > 0) {
    const auto a = integer(rng, 0, std::int64_t(n) - 1);
    const auto b = integer(rng, 0, std::int64_t(n) - 1);
    if (a == b || !seen.insert({a, b}).second) continue;
    edges.push_back({a, b, integer(rng, 1, max_w)});
    --extra;
  }
  return urlr::ComparisonGraph(n, edges);
}

inline Eigen::MatrixXd normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline std::vector<double> weights(Rng& rng, std::size_t n, std::int64_t max_w = 3) {
  std::vector<double> w(n);
  for (auto& v : w) v = double(integer(rng, 1, max_w));
  return w;
}

}  // namespace gen
