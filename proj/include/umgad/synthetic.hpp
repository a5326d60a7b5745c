#pragma once

#include <string>
#include <vector>

#include "umgad/graph.hpp"
#include "umgad/rng.hpp"

namespace umgad {

/// Multiplex stochastic block model with Gaussian community features.
struct SbmConfig {
  std::size_t nodes = 200;
  std::size_t relations = 2;
  std::size_t communities = 4;
  std::size_t feature_dim = 8;
  double avg_degree_in = 8.0;    // expected within-community degree per relation
  double avg_degree_out = 1.0;   // expected cross-community degree per relation
  double center_scale = 1.0;     // std of community centers
  double noise = 0.5;            // std of per-node feature noise
};

struct SyntheticGraph {
  MultiplexGraph graph;
  std::vector<std::size_t> community;
};

inline SyntheticGraph make_sbm_multiplex(const SbmConfig& cfg, std::uint64_t seed) {
  const std::size_t n = cfg.nodes, C = cfg.communities;
  RngStream s(seed, "synthetic/sbm");
  SyntheticGraph out;
  out.community.resize(n);
  for (NodeId v = 0; v < n; ++v) out.community[v] = v % C;

  Matrix centers(C, cfg.feature_dim);
  for (double& c : centers.values()) c = cfg.center_scale * s.normal();
  Matrix x(n, cfg.feature_dim);
  for (NodeId v = 0; v < n; ++v)
    for (std::size_t j = 0; j < cfg.feature_dim; ++j) x(v, j) = centers(out.community[v], j) + cfg.noise * s.normal();

  const double size_in = static_cast<double>(n) / static_cast<double>(C);
  const double p_in = std::min(1.0, cfg.avg_degree_in / std::max(1.0, size_in - 1.0));
  const double p_out = std::min(1.0, cfg.avg_degree_out / std::max(1.0, static_cast<double>(n) - size_in));
  for (std::size_t r = 0; r < cfg.relations; ++r) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (s.bernoulli(out.community[u] == out.community[v] ? p_in : p_out)) edges.emplace_back(u, v);
    out.graph.relations.push_back(RelationalSubgraph::from_edges(r, "rel" + std::to_string(r), n, edges));
  }
  out.graph.attributes = std::move(x);
  return out;
}

}  // namespace umgad
