#pragma once

// K-repeat masking and augmentation plans consumed by the autoencoders.
//
// Every (relation, repeat) pair draws from its own labeled RNG stream derived
// from the caller's base stream, so a plan never depends on planning order.

#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "umgad/autodiff.hpp"
#include "umgad/graph.hpp"
#include "umgad/rng.hpp"

namespace umgad {

struct MaskConfig {
  double mask_ratio = 0.2;
  std::size_t repeats = 10;
  std::size_t n_neg = 5;

  void validate() const {
    if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw ConfigError("mask ratio must lie in [0, 1]");
    if (repeats == 0) throw ConfigError("repeats must be >= 1");
    if (n_neg == 0) throw ConfigError("n_neg must be >= 1");
  }
};

struct RwrConfig {
  double restart_prob = 0.15;
  std::size_t subgraph_size = 8;
  std::size_t max_steps = 0;  // 0 -> 100 * subgraph_size

  std::size_t step_budget() const { return max_steps ? max_steps : 100 * subgraph_size; }

  void validate(std::size_t node_count) const {
    if (!(restart_prob > 0.0 && restart_prob <= 1.0)) throw ConfigError("restart probability must lie in (0, 1]");
    if (subgraph_size == 0) throw ConfigError("subgraph size must be >= 1");
    if (subgraph_size > node_count) throw ConfigError("subgraph size exceeds node count");
  }
};

/// round-half-up of ratio * count.
inline std::size_t masked_count(double ratio, std::size_t count) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count) + 0.5));
}

/// Masked positive edges of one (relation, repeat) with their corrupted endpoints.
struct EdgeMask {
  std::vector<Edge> edges;                    // (v, u): v keeps its endpoint in negatives
  std::vector<std::vector<NodeId>> negatives; // negatives[e] = u' candidates for edges[e]
  bool fallback = false;                      // some v was adjacent to every other node
};

struct MaskPlan {
  std::vector<std::vector<NodeId>> masked_nodes;  // [k]
  std::vector<std::vector<EdgeMask>> masked_edges; // [r][k]
};

struct RwrSubgraph {
  NodeId seed = 0;
  std::vector<NodeId> nodes;  // visit order
  EdgeMask induced;           // induced relation edges + negatives
};

struct AugmentPlan {
  std::vector<std::vector<std::pair<NodeId, NodeId>>> swaps;  // [k] (target, donor)
  std::vector<std::vector<RwrSubgraph>> subgraphs;            // [r][k]
};

inline RngStream substream(const RngStream& base, const std::string& suffix) {
  return RngStream(base.seed(), base.label() + "/" + suffix);
}

inline std::string rk_label(std::size_t r, std::size_t k) { return "r=" + std::to_string(r) + "/k=" + std::to_string(k); }

/// K node subsets of size round(r_m * |V|), uniform without replacement.
inline std::vector<std::vector<NodeId>> plan_attribute_masks(const MultiplexGraph& g, const MaskConfig& cfg, const RngStream& rng) {
  cfg.validate();
  const std::size_t n = g.node_count();
  const std::size_t count = masked_count(cfg.mask_ratio, n);
  std::vector<std::vector<NodeId>> out;
  out.reserve(cfg.repeats);
  for (std::size_t k = 0; k < cfg.repeats; ++k) {
    RngStream s = substream(rng, "k=" + std::to_string(k));
    out.push_back(s.sample_without_replacement(n, count));
  }
  return out;
}

/// Corrupt the far endpoint of each (v, u): u' uniform over non-neighbors of v
/// (excluding v). Falls back to u' != u when v is adjacent to everyone.
inline void sample_negatives(const RelationalSubgraph& rel, EdgeMask& mask, std::size_t n_neg, RngStream& s) {
  const std::size_t n = rel.node_count();
  mask.negatives.assign(mask.edges.size(), {});
  for (std::size_t e = 0; e < mask.edges.size(); ++e) {
    const auto [v, u] = mask.edges[e];
    auto& negs = mask.negatives[e];
    negs.reserve(n_neg);
    const bool exhausted = rel.degree(v) + 1 >= n;
    for (std::size_t j = 0; j < n_neg; ++j) {
      if (exhausted) {
        mask.fallback = true;
        if (n < 2) {
          negs.push_back(u);
          continue;
        }
        NodeId cand = s.uniform_index(n - 1);
        if (cand >= u) ++cand;
        negs.push_back(cand);
        continue;
      }
      NodeId cand;
      do {
        cand = s.uniform_index(n);
      } while (cand == v || rel.has_edge(v, cand));
      negs.push_back(cand);
    }
  }
}

/// Per (r, k): round(r_m * |E^r|) undirected edges without replacement, each
/// with n_neg negatives.
inline std::vector<std::vector<EdgeMask>> plan_edge_masks(const MultiplexGraph& g, const MaskConfig& cfg, const RngStream& rng) {
  cfg.validate();
  std::vector<std::vector<EdgeMask>> out(g.relation_count());
  for (std::size_t r = 0; r < g.relation_count(); ++r) {
    const auto& rel = g.relations[r];
    const auto all = rel.edges();
    const std::size_t count = masked_count(cfg.mask_ratio, all.size());
    for (std::size_t k = 0; k < cfg.repeats; ++k) {
      RngStream s = substream(rng, rk_label(r, k));
      EdgeMask m;
      for (std::size_t idx : s.sample_without_replacement(all.size(), count)) {
        auto [a, b] = all[idx];
        if (s.bernoulli(0.5)) std::swap(a, b);
        m.edges.emplace_back(a, b);
      }
      sample_negatives(rel, m, cfg.n_neg, s);
      out[r].push_back(std::move(m));
    }
  }
  return out;
}

inline MaskPlan plan_masks(const MultiplexGraph& g, const MaskConfig& cfg, const RngStream& rng) {
  return MaskPlan{plan_attribute_masks(g, cfg, substream(rng, "nodes")), plan_edge_masks(g, cfg, substream(rng, "edges"))};
}

/// K swap maps: round(r_m * |V|) targets, each with a uniform donor != target.
inline std::vector<std::vector<std::pair<NodeId, NodeId>>> plan_attribute_augmentation(const MultiplexGraph& g, const MaskConfig& cfg,
                                                                                      const RngStream& rng) {
  cfg.validate();
  const std::size_t n = g.node_count();
  if (n < 2) throw InsufficientNodes("attribute augmentation needs at least two nodes");
  const std::size_t count = masked_count(cfg.mask_ratio, n);
  std::vector<std::vector<std::pair<NodeId, NodeId>>> out;
  for (std::size_t k = 0; k < cfg.repeats; ++k) {
    RngStream s = substream(rng, "k=" + std::to_string(k));
    std::vector<std::pair<NodeId, NodeId>> swaps;
    for (NodeId target : s.sample_without_replacement(n, count)) {
      NodeId donor = s.uniform_index(n - 1);
      if (donor >= target) ++donor;
      swaps.emplace_back(target, donor);
    }
    out.push_back(std::move(swaps));
  }
  return out;
}

/// One RWR walk from a uniform non-isolated seed; returns visited nodes.
inline std::vector<NodeId> rwr_walk(const RelationalSubgraph& rel, NodeId seed, const RwrConfig& cfg, RngStream& s) {
  std::vector<NodeId> visited{seed};
  std::unordered_set<NodeId> seen{seed};
  NodeId cur = seed;
  const std::size_t budget = cfg.step_budget();
  for (std::size_t step = 0; step < budget && visited.size() < cfg.subgraph_size; ++step) {
    if (s.bernoulli(cfg.restart_prob)) {
      cur = seed;
      continue;
    }
    const auto nb = rel.neighbors(cur);
    cur = nb[s.uniform_index(nb.size())];
    if (seen.insert(cur).second) visited.push_back(cur);
  }
  return visited;
}

/// Relation edges with both ends in `nodes`.
inline std::vector<Edge> induced_edges(const RelationalSubgraph& rel, std::span<const NodeId> nodes) {
  std::unordered_set<NodeId> in(nodes.begin(), nodes.end());
  std::vector<Edge> out;
  for (NodeId u : nodes)
    for (NodeId v : rel.neighbors(u))
      if (u < v && in.count(v)) out.emplace_back(u, v);
  std::sort(out.begin(), out.end());
  return out;
}

/// Per (r, k): an RWR subgraph and the relation edges it induces.
inline std::vector<std::vector<RwrSubgraph>> sample_rwr_subgraphs(const MultiplexGraph& g, const RwrConfig& cfg, std::size_t repeats,
                                                                  std::size_t n_neg, const RngStream& rng) {
  cfg.validate(g.node_count());
  std::vector<std::vector<RwrSubgraph>> out(g.relation_count());
  for (std::size_t r = 0; r < g.relation_count(); ++r) {
    const auto& rel = g.relations[r];
    if (rel.edge_count() == 0) throw EmptyRelation("relation '" + rel.name() + "' has no edges to sample subgraphs from");
    std::vector<NodeId> seeds;
    for (NodeId v = 0; v < rel.node_count(); ++v)
      if (rel.degree(v) > 0) seeds.push_back(v);
    for (std::size_t k = 0; k < repeats; ++k) {
      RngStream s = substream(rng, rk_label(r, k));
      RwrSubgraph sg;
      sg.seed = seeds[s.uniform_index(seeds.size())];
      sg.nodes = rwr_walk(rel, sg.seed, cfg, s);
      for (auto [a, b] : induced_edges(rel, sg.nodes)) {
        if (s.bernoulli(0.5)) std::swap(a, b);
        sg.induced.edges.emplace_back(a, b);
      }
      sample_negatives(rel, sg.induced, n_neg, s);
      out[r].push_back(std::move(sg));
    }
  }
  return out;
}

inline AugmentPlan plan_augmentations(const MultiplexGraph& g, const MaskConfig& mcfg, const RwrConfig& rcfg, const RngStream& rng) {
  return AugmentPlan{plan_attribute_augmentation(g, mcfg, substream(rng, "swap")),
                     sample_rwr_subgraphs(g, rcfg, mcfg.repeats, mcfg.n_neg, substream(rng, "rwr"))};
}

/// Rows in `masked` replaced by the MASK token; gradient flows into the token.
inline Var apply_attribute_mask(Tape& tape, const Matrix& x, std::span<const NodeId> masked, Var mask_token) {
  return ad::replace_rows(tape.constant(x), masked, mask_token);
}

namespace plan_detail {
inline void dump_edges(std::ostream& out, const std::string& prefix, const EdgeMask& m) {
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    out << prefix << " edge=" << m.edges[e].first << ',' << m.edges[e].second << " negatives=";
    for (std::size_t j = 0; j < m.negatives[e].size(); ++j) out << (j ? ";" : "") << m.negatives[e][j];
    out << " fallback=" << (m.fallback ? 1 : 0) << '\n';
  }
}
}  // namespace plan_detail

/// Diagnostic text dump, one line per masked item.
inline void dump_plans(std::ostream& out, const MaskPlan& mask, const AugmentPlan& aug, const std::string& tag = "") {
  const std::string t = tag.empty() ? "" : tag + " ";
  for (std::size_t k = 0; k < mask.masked_nodes.size(); ++k)
    for (NodeId v : mask.masked_nodes[k]) out << t << "attr_mask k=" << k << " node=" << v << '\n';
  for (std::size_t r = 0; r < mask.masked_edges.size(); ++r)
    for (std::size_t k = 0; k < mask.masked_edges[r].size(); ++k)
      plan_detail::dump_edges(out, t + "edge_mask r=" + std::to_string(r) + " k=" + std::to_string(k), mask.masked_edges[r][k]);
  for (std::size_t k = 0; k < aug.swaps.size(); ++k)
    for (auto [target, donor] : aug.swaps[k]) out << t << "swap k=" << k << " target=" << target << " donor=" << donor << '\n';
  for (std::size_t r = 0; r < aug.subgraphs.size(); ++r)
    for (std::size_t k = 0; k < aug.subgraphs[r].size(); ++k) {
      const auto& sg = aug.subgraphs[r][k];
      out << t << "rwr r=" << r << " k=" << k << " seed=" << sg.seed << " nodes=";
      for (std::size_t i = 0; i < sg.nodes.size(); ++i) out << (i ? ";" : "") << sg.nodes[i];
      out << '\n';
      plan_detail::dump_edges(out, t + "rwr_edge r=" + std::to_string(r) + " k=" + std::to_string(k), sg.induced);
    }
}

}  // namespace umgad
