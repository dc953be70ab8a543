#pragma once

// Directed secrecy graph: black x sends an edge to black y when no red point
// lies in the open ball centred at x of radius |x - y|. Equivalently
// |x - y| <= guard(x), where guard(x) is the distance from x to the nearest
// red point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "secperc/grid_index.hpp"
#include "secperc/ppp.hpp"

namespace secperc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class GraphVariant { Directed, U, B };

inline const char* to_string(GraphVariant v) noexcept {
  switch (v) {
    case GraphVariant::Directed: return "directed";
    case GraphVariant::U: return "U";
    case GraphVariant::B: return "B";
  }
  return "?";
}

// Compressed adjacency lists. Undirected graphs store each edge in both
// endpoint lists.
struct AdjacencyGraph {
  bool directed = true;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> targets;

  std::size_t vertex_count() const noexcept { return offsets.size() - 1; }
  std::span<const std::uint32_t> neighbors(std::size_t v) const noexcept {
    return {targets.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
  // Directed: number of arcs. Undirected: number of edges.
  std::size_t edge_count() const noexcept { return directed ? targets.size() : targets.size() / 2; }

  bool has_edge(std::uint32_t u, std::uint32_t v) const noexcept {
    const auto n = neighbors(u);
    return std::find(n.begin(), n.end(), v) != n.end();
  }

  // Builds from an arc list; duplicate arcs are dropped and each list is
  // sorted by target id.
  static AdjacencyGraph from_arcs(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs,
                                  bool directed) {
    if (!directed) {
      const std::size_t m = arcs.size();
      arcs.reserve(2 * m);
      for (std::size_t i = 0; i < m; ++i) arcs.emplace_back(arcs[i].second, arcs[i].first);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    AdjacencyGraph g;
    g.directed = directed;
    g.offsets.assign(n + 1, 0);
    for (const auto& [u, v] : arcs) {
      if (u >= n || v >= n) throw std::out_of_range("AdjacencyGraph: vertex id out of range");
      ++g.offsets[u + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.targets.reserve(arcs.size());
    for (const auto& a : arcs) g.targets.push_back(a.second);
    return g;
  }
};

inline AdjacencyGraph reversed(const AdjacencyGraph& g) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
  arcs.reserve(g.targets.size());
  for (std::size_t u = 0; u < g.vertex_count(); ++u)
    for (auto v : g.neighbors(u)) arcs.emplace_back(v, static_cast<std::uint32_t>(u));
  return AdjacencyGraph::from_arcs(g.vertex_count(), std::move(arcs), g.directed);
}

// U keeps an edge present in either direction, B only edges present in both.
// Directed input is returned unchanged for GraphVariant::Directed.
inline AdjacencyGraph variant_view(const AdjacencyGraph& g, GraphVariant v) {
  if (!g.directed) throw std::invalid_argument("variant_view: expected a directed graph");
  if (v == GraphVariant::Directed) return g;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
  arcs.reserve(g.targets.size());
  for (std::size_t u = 0; u < g.vertex_count(); ++u) {
    for (auto w : g.neighbors(u)) {
      if (v == GraphVariant::U) {
        arcs.emplace_back(static_cast<std::uint32_t>(u), w);
      } else if (u < w) {
        const auto back = g.neighbors(w);
        // from_arcs leaves lists sorted by id
        if (std::binary_search(back.begin(), back.end(), static_cast<std::uint32_t>(u)))
          arcs.emplace_back(static_cast<std::uint32_t>(u), w);
      }
    }
  }
  return AdjacencyGraph::from_arcs(g.vertex_count(), std::move(arcs), false);
}

class SecrecyGraph {
 public:
  SecrecyGraph() = default;

  const PointSet& blacks() const noexcept { return blacks_; }
  const PointSet& reds() const noexcept { return reds_; }
  std::size_t vertex_count() const noexcept { return guard_.size(); }
  std::size_t edge_count() const noexcept { return adj_.size(); }

  // Distance to the nearest red point; +infinity when there are none.
  double guard(std::size_t v) const noexcept { return guard_[v]; }
  const std::vector<double>& guards() const noexcept { return guard_; }

  // Out-neighbours sorted by (distance, id).
  std::span<const Neighbor> out_neighbors(std::size_t v) const noexcept {
    return {adj_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t out_degree(std::size_t v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  std::vector<std::size_t> out_degrees() const {
    std::vector<std::size_t> out(vertex_count());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = out_degree(v);
    return out;
  }

  std::vector<std::size_t> in_degrees() const {
    std::vector<std::size_t> in(vertex_count(), 0);
    for (const auto& nb : adj_) ++in[nb.id];
    return in;
  }

  // Keeps arc u->v only when keep(u, neighbor) holds.
  template <class Pred>
  AdjacencyGraph digraph_if(Pred&& keep) const {
    AdjacencyGraph g;
    g.directed = true;
    g.offsets.assign(vertex_count() + 1, 0);
    g.targets.reserve(adj_.size());
    for (std::size_t u = 0; u < vertex_count(); ++u) {
      const std::size_t first = g.targets.size();
      for (const auto& nb : out_neighbors(u))
        if (keep(u, nb)) g.targets.push_back(nb.id);
      std::sort(g.targets.begin() + static_cast<std::ptrdiff_t>(first), g.targets.end());
      g.offsets[u + 1] = g.targets.size();
    }
    return g;
  }

  AdjacencyGraph digraph() const {
    return digraph_if([](std::size_t, const Neighbor&) { return true; });
  }

  friend SecrecyGraph build_graph(PointSet blacks, PointSet reds);

 private:
  PointSet blacks_;
  PointSet reds_;
  std::vector<double> guard_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
};

// Distance from x to the nearest indexed red point, or +infinity.
inline double guard_radius(std::span<const double> x, const GridIndex& reds) {
  const auto nb = reds.nearest(x);
  return nb ? nb->dist : kInfinity;
}

// Guards use only the reds inside the window; near the window boundary they
// overestimate the true guard, so statistics should be restricted to a core.
inline SecrecyGraph build_graph(PointSet blacks, PointSet reds) {
  if (blacks.dim() != reds.dim()) throw std::invalid_argument("build_graph: dimension mismatch");
  if (!(blacks.window() == reds.window())) throw std::invalid_argument("build_graph: window mismatch");
  if (blacks.kind() != PointKind::Black || reds.kind() != PointKind::Red)
    throw std::invalid_argument("build_graph: expected black nodes and red eavesdroppers");

  SecrecyGraph g;
  g.blacks_ = std::move(blacks);
  g.reds_ = std::move(reds);
  const std::size_t n = g.blacks_.size();
  const double lambda = g.reds_.intensity() > 0.0 ? g.reds_.intensity()
                                                   : static_cast<double>(g.reds_.size()) / g.reds_.window().volume();
  const GridIndex red_index(g.reds_, default_cell_size(lambda, g.reds_.window()));
  const GridIndex black_index(g.blacks_);

  g.guard_.resize(n);
  g.offsets_.assign(n + 1, 0);
  std::vector<Neighbor> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = g.blacks_.point(i);
    const double guard = guard_radius(x, red_index);
    g.guard_[i] = guard;
    scratch.clear();
    black_index.for_each_within(x, guard, [&](std::uint32_t id, double dist) {
      if (id != i) scratch.push_back({id, dist});
    });
    std::sort(scratch.begin(), scratch.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
    });
    g.adj_.insert(g.adj_.end(), scratch.begin(), scratch.end());
    g.offsets_[i + 1] = g.adj_.size();
  }
  return g;
}

// ---- serialization ----

inline void write_edges_csv(std::ostream& os, const SecrecyGraph& g) {
  os << "src,dst,dist\n";
  os.precision(17);
  for (std::size_t u = 0; u < g.vertex_count(); ++u)
    for (const auto& nb : g.out_neighbors(u)) os << u << ',' << nb.id << ',' << nb.dist << '\n';
}

inline nlohmann::json to_json(const SecrecyGraph& g) {
  nlohmann::json vertices = nlohmann::json::array();
  nlohmann::json adjacency = nlohmann::json::array();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto p = g.blacks().point(v);
    nlohmann::json guard = std::isfinite(g.guard(v)) ? nlohmann::json(g.guard(v)) : nlohmann::json(nullptr);
    vertices.push_back({{"id", v}, {"coords", std::vector<double>(p.begin(), p.end())}, {"guard", guard}});
    nlohmann::json out = nlohmann::json::array();
    for (const auto& nb : g.out_neighbors(v)) out.push_back({{"id", nb.id}, {"dist", nb.dist}});
    adjacency.push_back(std::move(out));
  }
  return {{"window", to_json(g.blacks().window())},
          {"black_intensity", g.blacks().intensity()},
          {"red_intensity", g.reds().intensity()},
          {"red_count", g.reds().size()},
          {"edge_count", g.edge_count()},
          {"vertices", std::move(vertices)},
          {"adjacency", std::move(adjacency)}};
}

}  // namespace secperc
