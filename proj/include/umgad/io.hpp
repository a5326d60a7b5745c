#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "umgad/errors.hpp"
#include "umgad/graph.hpp"

namespace umgad {

namespace io_detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if constexpr (std::is_floating_point_v<T>) {
    if (first != last && *first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw MissingFile(p.string());
  return in;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace io_detail

/// Parsed manifest; relation order is file order.
struct Manifest {
  std::size_t nodes = 0;
  std::filesystem::path features;
  std::vector<std::pair<std::string, std::filesystem::path>> relations;
  std::optional<std::filesystem::path> labels;
};

inline Manifest read_manifest(const std::filesystem::path& path) {
  auto in = io_detail::open_in(path);
  const auto base = path.parent_path();
  Manifest m;
  bool have_nodes = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(path.string(), lineno, "expected key=value");
    const auto key = io_detail::trim(t.substr(0, eq));
    const auto val = std::string(io_detail::trim(t.substr(eq + 1)));
    if (key == "nodes") {
      if (!io_detail::parse_number(val, m.nodes)) throw ParseError(path.string(), lineno, "bad node count");
      have_nodes = true;
    } else if (key == "features") {
      m.features = base / val;
    } else if (key == "labels") {
      m.labels = base / val;
    } else if (key.starts_with("relation.")) {
      m.relations.emplace_back(std::string(key.substr(9)), base / val);
    } else {
      throw ParseError(path.string(), lineno, "unknown manifest key '" + std::string(key) + "'");
    }
  }
  if (!have_nodes) throw ParseError(path.string(), lineno, "missing nodes=");
  if (m.features.empty()) throw ParseError(path.string(), lineno, "missing features=");
  if (m.relations.empty()) throw ParseError(path.string(), lineno, "at least one relation.<name>= required");
  return m;
}

inline Matrix read_features(const std::filesystem::path& path) {
  auto in = io_detail::open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::size_t n = 0, f = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto toks = io_detail::split_ws(t);
    if (toks.size() != 2 || !io_detail::parse_number(toks[0], n) || !io_detail::parse_number(toks[1], f) || n == 0 || f == 0)
      throw ParseError(path.string(), lineno, "expected header '<node_count> <f>'");
    break;
  }
  if (n == 0) throw ParseError(path.string(), lineno, "empty feature file");
  Matrix x(n, f);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (row >= n) throw ParseError(path.string(), lineno, "more feature rows than declared");
    const auto toks = io_detail::split_ws(t);
    if (toks.size() != f) throw ParseError(path.string(), lineno, "expected " + std::to_string(f) + " values");
    for (std::size_t j = 0; j < f; ++j) {
      double v;
      if (!io_detail::parse_number(toks[j], v) || !std::isfinite(v))
        throw ParseError(path.string(), lineno, "bad real '" + std::string(toks[j]) + "'");
      x(row, j) = v;
    }
    ++row;
  }
  if (row != n) throw ParseError(path.string(), lineno, "expected " + std::to_string(n) + " feature rows, got " + std::to_string(row));
  return x;
}

inline std::vector<Edge> read_edges(const std::filesystem::path& path) {
  auto in = io_detail::open_in(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto toks = io_detail::split_ws(t);
    NodeId u, v;
    if (toks.size() != 2 || !io_detail::parse_number(toks[0], u) || !io_detail::parse_number(toks[1], v))
      throw ParseError(path.string(), lineno, "expected '<u> <v>'");
    edges.emplace_back(u, v);
  }
  return edges;
}

/// Labels default to 0 for nodes not listed.
inline std::vector<int> read_labels(const std::filesystem::path& path, std::size_t node_count) {
  auto in = io_detail::open_in(path);
  std::vector<int> labels(node_count, 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto toks = io_detail::split_ws(t);
    NodeId v;
    int y;
    if (toks.size() != 2 || !io_detail::parse_number(toks[0], v) || !io_detail::parse_number(toks[1], y) || (y != 0 && y != 1))
      throw ParseError(path.string(), lineno, "expected '<node_id> <0|1>'");
    if (v >= node_count) throw IndexOutOfRange("label for node " + std::to_string(v) + " outside node range");
    labels[v] = y;
  }
  return labels;
}

/// Reads a manifest and everything it references. Self-loop warnings go to `warn`.
inline MultiplexGraph load_multiplex(const std::filesystem::path& manifest_path, std::ostream* warn = &std::cerr) {
  const Manifest m = read_manifest(manifest_path);
  MultiplexGraph g;
  g.attributes = read_features(m.features);
  if (g.attributes.rows() != m.nodes)
    throw InconsistentNodeCount("manifest declares " + std::to_string(m.nodes) + " nodes, feature file has " +
                                std::to_string(g.attributes.rows()));
  for (std::size_t r = 0; r < m.relations.size(); ++r) {
    const auto& [name, path] = m.relations[r];
    const auto edges = read_edges(path);
    std::size_t loops = 0;
    g.relations.push_back(RelationalSubgraph::from_edges(r, name, m.nodes, edges, &loops));
    if (loops > 0 && warn) *warn << "warning: dropped " << loops << " self-loop(s) in relation '" << name << "'\n";
  }
  if (m.labels) g.labels = read_labels(*m.labels, m.nodes);
  g.validate();
  return g;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

inline void write_labels(const std::filesystem::path& path, std::span<const int> labels) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << labels[i] << '\n';
}

/// Writes `<dir>/<stem>.ini` plus feature, edge and label files next to it.
/// Returns the manifest path.
inline std::filesystem::path write_multiplex(const MultiplexGraph& g, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const auto manifest = dir / (stem + ".ini");
  {
    auto out = open_out(dir / (stem + ".features.txt"));
    out << g.node_count() << ' ' << g.feature_dim() << '\n';
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      for (std::size_t j = 0; j < g.feature_dim(); ++j) {
        if (j) out << ' ';
        out << io_detail::format_double(g.attributes(i, j));
      }
      out << '\n';
    }
  }
  for (const auto& rel : g.relations) {
    auto out = open_out(dir / (stem + ".rel." + rel.name() + ".txt"));
    for (const auto& [u, v] : rel.edges()) out << u << ' ' << v << '\n';
  }
  if (g.labels) write_labels(dir / (stem + ".labels.txt"), *g.labels);
  auto out = open_out(manifest);
  out << "nodes=" << g.node_count() << '\n';
  out << "features=" << stem << ".features.txt\n";
  for (const auto& rel : g.relations) out << "relation." << rel.name() << '=' << stem << ".rel." << rel.name() << ".txt\n";
  if (g.labels) out << "labels=" << stem << ".labels.txt\n";
  return manifest;
}

}  // namespace umgad
