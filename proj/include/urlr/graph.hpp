#pragma once

// Directed, vote-weighted pairwise comparison graph.
//
// An edge (src, dst, w) records that w annotator votes judged `src` to have
// more of the property than `dst`. Both directions of a pair may coexist.
// Edges are kept sorted by (src, dst); that order fixes the row order of every
// per-edge vector and matrix built downstream.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

namespace urlr {

using NodeId = std::int64_t;

// One vote per edge-mask entry: 1 keeps the edge, 0 drops it.
using EdgeMask = std::vector<std::uint8_t>;

struct AnnotationRecord {
  NodeId preferred = 0;
  NodeId other = 0;
  std::string annotator;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  std::int64_t weight = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class ComparisonGraph {
 public:
  ComparisonGraph() = default;

  // Validates ids and weights, merges duplicate (src, dst) entries by summing
  // weights, and sorts edges lexicographically.
  ComparisonGraph(std::size_t n_nodes, std::vector<Edge> edges);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_[k]; }

  std::int64_t total_weight() const;
  std::optional<std::size_t> find_edge(NodeId src, NodeId dst) const;

  // Subgraph on the same node set keeping edges with keep[k] != 0.
  ComparisonGraph filtered(const EdgeMask& keep) const;

  friend bool operator==(const ComparisonGraph&, const ComparisonGraph&) = default;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
};

// Aggregates votes into a graph. Throws ValidationError naming the offending
// record index on self-loops or ids outside [0, n_nodes).
ComparisonGraph build_graph(std::span<const AnnotationRecord> records,
                            std::size_t n_nodes);

// |E| x N matrix with +1 at the source column and -1 at the target column.
Eigen::SparseMatrix<double> incidence_matrix(const ComparisonGraph& g);

// Per edge: 1 if its weight strictly exceeds the reverse direction's weight
// (missing reverse counts as 0). Ties drop both directions.
EdgeMask majority_vote_mask(const ComparisonGraph& g);
ComparisonGraph majority_vote_filter(const ComparisonGraph& g);

// Weakly connected components, each sorted ascending, components ordered by
// their smallest member.
std::vector<std::vector<NodeId>> connected_components(const ComparisonGraph& g);

}  // namespace urlr
