#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "umgad/umgad.hpp"

namespace umgad::fx {

inline MultiplexGraph make_graph(std::size_t n, const std::vector<std::vector<Edge>>& rels, Matrix x) {
  MultiplexGraph g;
  for (std::size_t r = 0; r < rels.size(); ++r)
    g.relations.push_back(RelationalSubgraph::from_edges(r, "rel" + std::to_string(r), n, rels[r]));
  g.attributes = std::move(x);
  return g;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  RngStream s(seed, "test/matrix");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * s.normal();
  return m;
}

/// Path 0-1-2-...-(n-1) in every relation, plus a chord per extra relation.
inline MultiplexGraph small_graph(std::size_t n, std::size_t relations, std::size_t f, std::uint64_t seed) {
  std::vector<std::vector<Edge>> rels(relations);
  for (std::size_t r = 0; r < relations; ++r) {
    for (NodeId v = 0; v + 1 < n; ++v) rels[r].emplace_back(v, v + 1);
    for (NodeId v = 0; v + 2 + r < n; v += 3) rels[r].emplace_back(v, v + 2 + r);
  }
  return make_graph(n, rels, random_matrix(n, f, seed));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("umgad_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace umgad::fx
