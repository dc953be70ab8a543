#pragma once

// Components, strongly connected components, reachability and the
// boundary-escape percolation proxy on secrecy-graph views.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "secperc/secrecy_graph.hpp"

namespace secperc {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) noexcept {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Union by size.
  bool unite(std::uint32_t a, std::uint32_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

enum class LabelMode { U, SCC, Out, In, B };

inline const char* to_string(LabelMode m) noexcept {
  switch (m) {
    case LabelMode::U: return "U";
    case LabelMode::SCC: return "SCC";
    case LabelMode::Out: return "out";
    case LabelMode::In: return "in";
    case LabelMode::B: return "B";
  }
  return "?";
}

// Partition modes (U, SCC, B) carry a component id per vertex, numbered in
// order of first appearance. Reach modes (Out, In) carry a 0/1 flag per
// vertex and the root.
struct ComponentLabeling {
  LabelMode mode = LabelMode::U;
  std::vector<std::uint32_t> labels;
  std::size_t component_count = 0;
  std::optional<std::uint32_t> root;

  std::vector<std::size_t> component_sizes() const {
    std::vector<std::size_t> sizes(component_count, 0);
    for (auto l : labels) ++sizes[l];
    return sizes;
  }
};

namespace detail {
inline void canonicalize(ComponentLabeling& lab) {
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(lab.labels.size(), kUnset);
  std::uint32_t next = 0;
  for (auto& l : lab.labels) {
    if (remap[l] == kUnset) remap[l] = next++;
    l = remap[l];
  }
  lab.component_count = next;
}
}  // namespace detail

inline ComponentLabeling undirected_components(const AdjacencyGraph& g, LabelMode mode = LabelMode::U) {
  if (g.directed) throw std::invalid_argument("undirected_components: expected an undirected view");
  const std::size_t n = g.vertex_count();
  UnionFind uf(n);
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : g.neighbors(u)) uf.unite(static_cast<std::uint32_t>(u), v);
  ComponentLabeling lab;
  lab.mode = mode;
  lab.labels.resize(n);
  for (std::size_t u = 0; u < n; ++u) lab.labels[u] = uf.find(static_cast<std::uint32_t>(u));
  detail::canonicalize(lab);
  return lab;
}

// Tarjan's algorithm with an explicit stack.
inline ComponentLabeling strongly_connected_components(const AdjacencyGraph& g) {
  if (!g.directed) throw std::invalid_argument("strongly_connected_components: expected a directed view");
  const std::size_t n = g.vertex_count();
  constexpr auto kUnvisited = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;  // (vertex, next edge offset)
  std::uint32_t counter = 0, ncomp = 0;

  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] != kUnvisited) continue;
    call.emplace_back(static_cast<std::uint32_t>(s), g.offsets[s]);
    index[s] = low[s] = counter++;
    stack.push_back(static_cast<std::uint32_t>(s));
    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e < g.offsets[v + 1]) {
        const std::uint32_t w = g.targets[e++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          call.emplace_back(w, g.offsets[w]);
        } else if (comp[w] == kUnvisited) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          comp[w] = ncomp;
        } while (w != done);
        ++ncomp;
      }
      if (!call.empty()) {
        const std::uint32_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  ComponentLabeling lab;
  lab.mode = LabelMode::SCC;
  lab.labels = std::move(comp);
  detail::canonicalize(lab);
  return lab;
}

// Flags every vertex reachable from any source along arcs of g.
inline std::vector<char> reach_from(const AdjacencyGraph& g, std::span<const std::uint32_t> sources) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<std::uint32_t> queue;
  for (auto s : sources) {
    if (s >= g.vertex_count()) throw std::out_of_range("reach: unknown vertex id");
    if (!seen[s]) {
      seen[s] = 1;
      queue.push_back(s);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (auto w : g.neighbors(queue[head]))
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
  return seen;
}

enum class Direction { Out, In };

// Out-reach follows arcs forward from v; in-reach is out-reach on the
// reversed graph.
inline ComponentLabeling reach(const AdjacencyGraph& g, std::uint32_t v, Direction dir) {
  if (v >= g.vertex_count()) throw std::out_of_range("reach: unknown vertex id");
  const std::uint32_t src[] = {v};
  std::vector<char> flags = dir == Direction::Out || !g.directed ? reach_from(g, src) : reach_from(reversed(g), src);
  ComponentLabeling lab;
  lab.mode = dir == Direction::Out ? LabelMode::Out : LabelMode::In;
  lab.labels.assign(flags.begin(), flags.end());
  lab.component_count = 2;
  lab.root = v;
  return lab;
}

enum class PercolationMode { U, O, I, S, B };

inline const char* to_string(PercolationMode m) noexcept {
  switch (m) {
    case PercolationMode::U: return "U";
    case PercolationMode::O: return "O";
    case PercolationMode::I: return "I";
    case PercolationMode::S: return "S";
    case PercolationMode::B: return "B";
  }
  return "?";
}

inline PercolationMode percolation_mode_from_string(const std::string& s) {
  if (s == "U") return PercolationMode::U;
  if (s == "O") return PercolationMode::O;
  if (s == "I") return PercolationMode::I;
  if (s == "S") return PercolationMode::S;
  if (s == "B") return PercolationMode::B;
  throw std::invalid_argument("unknown percolation mode: " + s);
}

struct EscapeStats {
  PercolationMode mode = PercolationMode::U;
  double lambda = 0.0;
  double margin = 0.0;
  double fraction = 0.0;
  std::size_t n_core = 0;
};

// Default core margin: 10% of the shortest window side.
inline double default_margin(const Window& w) { return 0.1 * w.shortest_side(); }

inline void check_margin(const Window& w, double margin, bool allow_zero) {
  const bool ok = (allow_zero ? margin >= 0.0 : margin > 0.0) && margin < 0.5 * w.shortest_side();
  if (!ok) throw std::invalid_argument("margin must lie in (0, shortest_side / 2)");
}

// Core vertices are at distance >= margin from every face.
inline std::vector<char> core_mask(const PointSet& ps, double margin) {
  std::vector<char> core(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i)
    core[i] = ps.window().distance_to_boundary(ps.point(i)) >= margin ? 1 : 0;
  return core;
}

// Fraction of core vertices whose mode-component (U, S, B) or reach set
// (O: out-reach, I: in-reach) contains a vertex within margin of the boundary.
inline EscapeStats escape_fraction(const SecrecyGraph& g, PercolationMode mode, double margin) {
  const Window& w = g.blacks().window();
  check_margin(w, margin, false);
  const auto core = core_mask(g.blacks(), margin);
  const std::size_t n = g.vertex_count();
  std::vector<std::uint32_t> rim;
  for (std::size_t i = 0; i < n; ++i)
    if (!core[i]) rim.push_back(static_cast<std::uint32_t>(i));

  std::vector<char> escapes(n, 0);
  const AdjacencyGraph dg = g.digraph();
  auto mark_by_labels = [&](const ComponentLabeling& lab) {
    std::vector<char> hit(lab.component_count, 0);
    for (auto r : rim) hit[lab.labels[r]] = 1;
    for (std::size_t i = 0; i < n; ++i) escapes[i] = hit[lab.labels[i]];
  };
  switch (mode) {
    case PercolationMode::U: mark_by_labels(undirected_components(variant_view(dg, GraphVariant::U))); break;
    case PercolationMode::B: mark_by_labels(undirected_components(variant_view(dg, GraphVariant::B), LabelMode::B)); break;
    case PercolationMode::S: mark_by_labels(strongly_connected_components(dg)); break;
    // v reaches the rim iff v is in the in-reach of the rim.
    case PercolationMode::O: escapes = reach_from(reversed(dg), rim); break;
    case PercolationMode::I: escapes = reach_from(dg, rim); break;
  }
  EscapeStats st;
  st.mode = mode;
  st.lambda = g.reds().intensity();
  st.margin = margin;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    ++st.n_core;
    hits += escapes[i] ? 1 : 0;
  }
  st.fraction = st.n_core ? static_cast<double>(hits) / static_cast<double>(st.n_core) : 0.0;
  return st;
}

inline void write_labels_csv(std::ostream& os, const ComponentLabeling& lab) {
  os << "vertex,label\n";
  for (std::size_t v = 0; v < lab.labels.size(); ++v) os << v << ',' << lab.labels[v] << '\n';
}

inline nlohmann::json to_json(const EscapeStats& s) {
  return {{"mode", to_string(s.mode)}, {"lambda", s.lambda}, {"margin", s.margin},
          {"fraction", s.fraction}, {"n_core", s.n_core}};
}

}  // namespace secperc
