#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "umgad/errors.hpp"
#include "umgad/matrix.hpp"

namespace umgad {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// One relation's undirected, unweighted adjacency in CSR form.
///
/// Both directions are stored; rows are sorted; no self-loops.
class RelationalSubgraph {
 public:
  RelationalSubgraph() = default;

  /// Builds from an arbitrary edge list: symmetrizes, drops self-loops and duplicates.
  /// Returns the number of self-loops dropped through `dropped_self_loops` when given.
  static RelationalSubgraph from_edges(std::size_t relation_id, std::string name, std::size_t node_count,
                                       std::span<const Edge> edges, std::size_t* dropped_self_loops = nullptr) {
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    std::size_t loops = 0;
    for (const auto& [u, v] : edges) {
      if (u >= node_count || v >= node_count)
        throw IndexOutOfRange("edge (" + std::to_string(u) + "," + std::to_string(v) + ") outside node range " +
                              std::to_string(node_count));
      if (u == v) {
        ++loops;
        continue;
      }
      directed.emplace_back(u, v);
      directed.emplace_back(v, u);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
    if (dropped_self_loops) *dropped_self_loops = loops;

    RelationalSubgraph g;
    g.relation_id_ = relation_id;
    g.name_ = std::move(name);
    g.node_count_ = node_count;
    g.row_ptr_.assign(node_count + 1, 0);
    g.col_idx_.reserve(directed.size());
    for (const auto& [u, v] : directed) {
      ++g.row_ptr_[u + 1];
      g.col_idx_.push_back(v);
    }
    for (std::size_t i = 0; i < node_count; ++i) g.row_ptr_[i + 1] += g.row_ptr_[i];
    return g;
  }

  std::size_t relation_id() const noexcept { return relation_id_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t node_count() const noexcept { return node_count_; }
  /// Number of undirected edges.
  std::size_t edge_count() const noexcept { return col_idx_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {col_idx_.data() + row_ptr_[v], row_ptr_[v + 1] - row_ptr_[v]};
  }

  std::size_t degree(NodeId v) const {
    if (v >= node_count_) throw IndexOutOfRange("node " + std::to_string(v) + " outside node range");
    return row_ptr_[v + 1] - row_ptr_[v];
  }

  bool has_edge(NodeId u, NodeId v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Undirected edges as (u, v) with u < v, sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count_; ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  bool operator==(const RelationalSubgraph&) const = default;

 private:
  std::size_t relation_id_ = 0;
  std::string name_;
  std::size_t node_count_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<NodeId> col_idx_;
};

/// R relations over one shared node set and attribute matrix.
struct MultiplexGraph {
  std::vector<RelationalSubgraph> relations;
  Matrix attributes;
  std::optional<std::vector<int>> labels;

  std::size_t node_count() const noexcept { return attributes.rows(); }
  std::size_t feature_dim() const noexcept { return attributes.cols(); }
  std::size_t relation_count() const noexcept { return relations.size(); }

  /// Throws on any broken invariant.
  void validate() const {
    if (attributes.rows() == 0 || attributes.cols() == 0)
      throw InconsistentNodeCount("attribute matrix must have at least one node and one feature");
    if (!attributes.all_finite()) throw DataError("attribute matrix contains non-finite values");
    if (relations.empty()) throw DataError("multiplex graph needs at least one relation");
    for (const auto& r : relations)
      if (r.node_count() != node_count())
        throw InconsistentNodeCount("relation '" + r.name() + "' has " + std::to_string(r.node_count()) +
                                    " nodes, attributes have " + std::to_string(node_count()));
    if (labels && labels->size() != node_count()) throw InconsistentNodeCount("label vector length differs from node count");
  }

  bool operator==(const MultiplexGraph&) const = default;
};

/// Number of distinct neighbors of v.
inline std::size_t degree(const RelationalSubgraph& g, NodeId v) { return g.degree(v); }

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
inline SparseMatrix normalize_adjacency(const RelationalSubgraph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> inv_sqrt(n);
  for (NodeId v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  SparseMatrix s;
  s.rows = s.cols = n;
  s.row_ptr.assign(n + 1, 0);
  s.col_idx.reserve(2 * g.edge_count() + n);
  s.values.reserve(2 * g.edge_count() + n);
  for (NodeId u = 0; u < n; ++u) {
    bool diag_done = false;
    for (NodeId v : g.neighbors(u)) {
      if (!diag_done && v > u) {
        s.col_idx.push_back(u);
        s.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
        diag_done = true;
      }
      s.col_idx.push_back(v);
      s.values.push_back(inv_sqrt[u] * inv_sqrt[v]);
    }
    if (!diag_done) {
      s.col_idx.push_back(u);
      s.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
    }
    s.row_ptr[u + 1] = s.col_idx.size();
  }
  return s;
}

/// Relation with `removed` undirected edges taken out.
inline RelationalSubgraph without_edges(const RelationalSubgraph& g, std::span<const Edge> removed) {
  std::vector<Edge> drop;
  drop.reserve(removed.size());
  for (auto [u, v] : removed) drop.emplace_back(std::min(u, v), std::max(u, v));
  std::sort(drop.begin(), drop.end());
  std::vector<Edge> keep;
  for (const Edge& e : g.edges())
    if (!std::binary_search(drop.begin(), drop.end(), e)) keep.push_back(e);
  return RelationalSubgraph::from_edges(g.relation_id(), g.name(), g.node_count(), keep);
}

/// Per-feature z-scoring; constant columns are centered only.
inline void standardize_features(Matrix& x) {
  const std::size_t n = x.rows();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x(i, j) = sd > 1e-12 ? (x(i, j) - mean) / sd : x(i, j) - mean;
  }
}

}  // namespace umgad
