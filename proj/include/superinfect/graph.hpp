#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "superinfect/csv.hpp"
#include "superinfect/error.hpp"
#include "superinfect/rng.hpp"

namespace superinfect {

using Node = std::uint32_t;

/// Simple undirected graph on nodes 0..n-1 stored as adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adjacency_(n) {}

  std::size_t size() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::span<const Node> neighbors(Node v) const { return adjacency_[v]; }
  std::size_t degree(Node v) const { return adjacency_[v].size(); }

  /// Caller guarantees u != v and that the edge is not already present.
  void add_edge(Node u, Node v) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
    ++edge_count_;
  }

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::vector<Node>> adjacency_;
  std::size_t edge_count_ = 0;
};

struct DegreeSummary {
  double mean_degree = 0.0;
  std::size_t max_degree = 0;
  std::size_t isolated_count = 0;
};

/// G(n, p) with p = c/n. Pairs are visited with geometric skips
/// (Batagelj & Brandes), so the cost is O(n + edges).
inline Graph sample_er_graph(std::size_t n, double c, std::uint64_t seed) {
  require(n >= 1, "graph must have at least one node");
  require(c >= 0.0, "mean degree must be nonnegative");
  require(n <= std::numeric_limits<Node>::max(), "node count exceeds index type");
  const double p = c / static_cast<double>(n);
  require(p <= 1.0, "edge probability c/n exceeds 1");

  Graph g(n);
  if (p <= 0.0 || n < 2) return g;
  if (p >= 1.0) {
    for (Node v = 1; v < n; ++v)
      for (Node w = 0; w < v; ++w) g.add_edge(v, w);
    return g;
  }

  Rng rng = make_rng(seed);
  const double log_q = std::log1p(-p);
  std::int64_t v = 1;
  std::int64_t w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double r = uniform01(rng);
    const double skip = std::floor(std::log1p(-r) / log_q);
    // Skips beyond the remaining pair count end the scan.
    if (skip > 4.0 * static_cast<double>(nn) * static_cast<double>(nn)) break;
    w += 1 + static_cast<std::int64_t>(skip);
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) g.add_edge(static_cast<Node>(v), static_cast<Node>(w));
  }
  return g;
}

inline DegreeSummary degree_stats(const Graph& g) {
  DegreeSummary s;
  if (g.size() == 0) return s;
  for (Node v = 0; v < g.size(); ++v) {
    s.max_degree = std::max(s.max_degree, g.degree(v));
    if (g.degree(v) == 0) ++s.isolated_count;
  }
  s.mean_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.size());
  return s;
}

/// Edge list with a "# n=<n> c=<c> seed=<seed>" header, one "u v" line per edge (u < v).
inline void write_edge_list(std::ostream& os, const Graph& g, double c, std::uint64_t seed) {
  os << "# n=" << g.size() << " c=" << format_double(c) << " seed=" << seed << '\n';
  for (Node u = 0; u < g.size(); ++u)
    for (Node v : g.neighbors(u))
      if (u < v) os << u << ' ' << v << '\n';
}

}  // namespace superinfect
