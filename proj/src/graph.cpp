#include "urlr/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "urlr/error.hpp"

namespace urlr {

ComparisonGraph::ComparisonGraph(std::size_t n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes) {
  const auto n = static_cast<NodeId>(n_nodes);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw ValidationError("edge " + std::to_string(k) + " (" + std::to_string(e.src) +
                            "->" + std::to_string(e.dst) + ") has a node id outside [0, " +
                            std::to_string(n_nodes) + ")");
    }
    if (e.src == e.dst) {
      throw ValidationError("edge " + std::to_string(k) + " is a self-loop on node " +
                            std::to_string(e.src));
    }
    if (e.weight < 1) {
      throw ValidationError("edge " + std::to_string(k) + " has weight " +
                            std::to_string(e.weight) + " < 1");
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  for (const Edge& e : edges) {
    if (!edges_.empty() && edges_.back().src == e.src && edges_.back().dst == e.dst) {
      edges_.back().weight += e.weight;
    } else {
      edges_.push_back(e);
    }
  }
}

std::int64_t ComparisonGraph::total_weight() const {
  return std::accumulate(edges_.begin(), edges_.end(), std::int64_t{0},
                         [](std::int64_t acc, const Edge& e) { return acc + e.weight; });
}

std::optional<std::size_t> ComparisonGraph::find_edge(NodeId src, NodeId dst) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(src, dst),
                             [](const Edge& e, const std::pair<NodeId, NodeId>& key) {
                               return std::pair(e.src, e.dst) < key;
                             });
  if (it == edges_.end() || it->src != src || it->dst != dst) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

ComparisonGraph ComparisonGraph::filtered(const EdgeMask& keep) const {
  if (keep.size() != edges_.size()) {
    throw ValidationError("edge mask has length " + std::to_string(keep.size()) +
                          " but the graph has " + std::to_string(edges_.size()) + " edges");
  }
  ComparisonGraph out;
  out.n_nodes_ = n_nodes_;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (keep[k]) out.edges_.push_back(edges_[k]);
  }
  return out;
}

ComparisonGraph build_graph(std::span<const AnnotationRecord> records, std::size_t n_nodes) {
  const auto n = static_cast<NodeId>(n_nodes);
  std::map<std::pair<NodeId, NodeId>, std::int64_t> votes;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const AnnotationRecord& r = records[k];
    if (r.preferred == r.other) {
      throw ValidationError("record " + std::to_string(k) + " compares node " +
                            std::to_string(r.preferred) + " with itself");
    }
    if (r.preferred < 0 || r.preferred >= n || r.other < 0 || r.other >= n) {
      throw ValidationError("record " + std::to_string(k) + " (" + std::to_string(r.preferred) +
                            "," + std::to_string(r.other) + ") references a node outside [0, " +
                            std::to_string(n_nodes) + ")");
    }
    ++votes[{r.preferred, r.other}];
  }
  std::vector<Edge> edges;
  edges.reserve(votes.size());
  for (const auto& [pair, w] : votes) edges.push_back({pair.first, pair.second, w});
  return ComparisonGraph(n_nodes, std::move(edges));
}

Eigen::SparseMatrix<double> incidence_matrix(const ComparisonGraph& g) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * g.n_edges());
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const Edge& e = g.edge(k);
    const auto row = static_cast<Eigen::Index>(k);
    entries.emplace_back(row, static_cast<Eigen::Index>(e.src), 1.0);
    entries.emplace_back(row, static_cast<Eigen::Index>(e.dst), -1.0);
  }
  Eigen::SparseMatrix<double> c(static_cast<Eigen::Index>(g.n_edges()),
                                static_cast<Eigen::Index>(g.n_nodes()));
  c.setFromTriplets(entries.begin(), entries.end());
  return c;
}

EdgeMask majority_vote_mask(const ComparisonGraph& g) {
  EdgeMask keep(g.n_edges(), 0);
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const Edge& e = g.edge(k);
    std::int64_t reverse = 0;
    if (auto r = g.find_edge(e.dst, e.src)) reverse = g.edge(*r).weight;
    keep[k] = e.weight > reverse ? 1 : 0;
  }
  return keep;
}

ComparisonGraph majority_vote_filter(const ComparisonGraph& g) {
  return g.filtered(majority_vote_mask(g));
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so each root is its component's minimum id.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::vector<NodeId>> connected_components(const ComparisonGraph& g) {
  DisjointSets sets(g.n_nodes());
  for (const Edge& e : g.edges()) {
    sets.unite(static_cast<std::size_t>(e.src), static_cast<std::size_t>(e.dst));
  }
  std::vector<std::vector<NodeId>> components;
  std::vector<std::size_t> slot(g.n_nodes(), g.n_nodes());
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    const std::size_t root = sets.find(v);
    if (slot[root] == g.n_nodes()) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(static_cast<NodeId>(v));
  }
  return components;
}

}  // namespace urlr
