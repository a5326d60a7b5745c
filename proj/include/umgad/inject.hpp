#pragma once

#include <algorithm>
#include <vector>

#include "umgad/graph.hpp"
#include "umgad/rng.hpp"

namespace umgad {

struct InjectionConfig {
  std::size_t n_struct = 0;    // number of injected cliques
  std::size_t clique_size = 5;
  std::size_t n_attr = 0;      // number of attribute-swapped victims
  std::size_t candidates = 50;
};

/// Splits `total` anomalies half structural, half attribute, rounding toward
/// whole cliques on the structural side: 25 with q=5 gives 3 cliques and 10.
inline InjectionConfig split_injection(std::size_t total, std::size_t clique_size) {
  if (clique_size < 2) throw ConfigError("clique size must be >= 2");
  InjectionConfig cfg;
  cfg.clique_size = clique_size;
  const std::size_t struct_nodes = (total + 1) / 2;
  cfg.n_struct = std::min((struct_nodes + clique_size - 1) / clique_size, total / clique_size);
  cfg.n_attr = total - cfg.n_struct * clique_size;
  return cfg;
}

struct InjectionResult {
  MultiplexGraph graph;
  std::vector<int> labels;
  std::vector<std::vector<NodeId>> cliques;          // member lists
  std::vector<std::size_t> clique_relation;          // relation of each clique
  std::vector<std::pair<NodeId, NodeId>> attr_swaps;  // (victim, source of copied row)
};

/// Plants structural anomalies (cliques within one random relation each) and
/// contextual anomalies (attribute row copied from the farthest of
/// `candidates` random nodes). Victims are distinct and previously unlabeled.
inline InjectionResult inject_anomalies(const MultiplexGraph& g, const InjectionConfig& cfg, const RngStream& rng) {
  if (cfg.n_struct > 0 && cfg.clique_size < 2) throw ConfigError("clique size must be >= 2");
  const std::size_t n = g.node_count();
  std::vector<NodeId> eligible;
  for (NodeId v = 0; v < n; ++v)
    if (!g.labels || (*g.labels)[v] == 0) eligible.push_back(v);
  const std::size_t needed = cfg.n_struct * cfg.clique_size + cfg.n_attr;
  if (needed > eligible.size())
    throw InsufficientNodes("injection needs " + std::to_string(needed) + " unlabeled nodes, have " + std::to_string(eligible.size()));

  RngStream s(rng.seed(), rng.label() + "/inject");
  const auto pick = s.sample_without_replacement(eligible.size(), needed);
  InjectionResult res;
  res.labels = g.labels ? *g.labels : std::vector<int>(n, 0);

  std::vector<std::vector<Edge>> added(g.relation_count());
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < cfg.n_struct; ++c) {
    std::vector<NodeId> members;
    for (std::size_t j = 0; j < cfg.clique_size; ++j) members.push_back(eligible[pick[cursor++]]);
    const std::size_t r = s.uniform_index(g.relation_count());
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) added[r].emplace_back(members[a], members[b]);
    for (NodeId v : members) res.labels[v] = 1;
    res.cliques.push_back(std::move(members));
    res.clique_relation.push_back(r);
  }

  Matrix x = g.attributes;
  for (std::size_t a = 0; a < cfg.n_attr; ++a) {
    const NodeId victim = eligible[pick[cursor++]];
    const auto cands = s.sample_without_replacement(n, std::min(cfg.candidates, n));
    NodeId best = cands.front();
    double best_d = -1.0;
    for (NodeId c : cands) {
      double d = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) d += (g.attributes(victim, j) - g.attributes(c, j)) * (g.attributes(victim, j) - g.attributes(c, j));
      if (d > best_d) {
        best_d = d;
        best = c;
      }
    }
    std::copy(g.attributes.row(best).begin(), g.attributes.row(best).end(), x.row(victim).begin());
    res.labels[victim] = 1;
    res.attr_swaps.emplace_back(victim, best);
  }

  res.graph.attributes = std::move(x);
  for (std::size_t r = 0; r < g.relation_count(); ++r) {
    auto edges = g.relations[r].edges();
    edges.insert(edges.end(), added[r].begin(), added[r].end());
    res.graph.relations.push_back(RelationalSubgraph::from_edges(r, g.relations[r].name(), n, edges));
  }
  res.graph.labels = res.labels;
  return res;
}

}  // namespace umgad
