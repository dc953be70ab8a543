#pragma once

// High-confidence Monte-Carlo bounds on percolation thresholds. Each trial
// samples black and red points in a pair of adjacent squares S u T and checks
// a crossing event whose probability, if at least 0.8639, makes the induced
// 1-independent bond model on Z^2 percolate.
//
//   lower bound: with edges censored to those guaranteed regardless of the
//     exterior, more than half of the blacks in disc K reach more than half
//     of the blacks in disc M, and vice versa.
//   upper bound: with no exterior reds assumed, no path entering from
//     outside S u T crosses the segment joining the centres of S and T.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "secperc/components.hpp"
#include "secperc/grid_index.hpp"
#include "secperc/parallel.hpp"
#include "secperc/ppp.hpp"
#include "secperc/rng.hpp"
#include "secperc/secrecy_graph.hpp"
#include "secperc/variant.hpp"

namespace secperc {

enum class BoundSide { Lower, Upper };

inline const char* to_string(BoundSide b) noexcept { return b == BoundSide::Lower ? "lower" : "upper"; }

inline BoundSide bound_side_from_string(const std::string& s) {
  if (s == "lower") return BoundSide::Lower;
  if (s == "upper") return BoundSide::Upper;
  throw std::invalid_argument("unknown bound side: " + s + " (expected lower or upper)");
}

inline GraphVariant graph_variant(Variant v) noexcept {
  switch (v) {
    case Variant::U: return GraphVariant::U;
    case Variant::O: return GraphVariant::Directed;
    case Variant::B: return GraphVariant::B;
  }
  return GraphVariant::Directed;
}

struct TrialConfig {
  Variant variant = Variant::B;
  BoundSide bound_side = BoundSide::Lower;
  double lambda = 0.1;
  double r = 10.0;  // radius of the discs K and M
  double s = 0.0;   // clearance between the discs and the square boundaries
  std::size_t trials = 100;
  std::uint64_t master = 0;
  double step = 0.0;  // exposure-region boundary step; 0 selects the default

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("TrialConfig: lambda must be > 0");
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("TrialConfig: r must be > 0");
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("TrialConfig: s must be >= 0");
    if (trials == 0) throw std::invalid_argument("TrialConfig: trials must be positive");
    if (!(step >= 0.0)) throw std::invalid_argument("TrialConfig: step must be >= 0");
  }
};

// S = [0,R] x [0,R], T = [R,2R] x [0,R] with R = 2r + 2s; K and M are the
// discs of radius r centred in S and T.
struct TrialGeometry {
  double side = 0.0;
  double radius = 0.0;
  Window window;
  std::array<double, 2> k_center{};
  std::array<double, 2> m_center{};

  static TrialGeometry make(double r, double s) {
    TrialGeometry g;
    g.side = 2.0 * r + 2.0 * s;
    g.radius = r;
    g.window = Window::from_sides({2.0 * g.side, g.side});
    g.k_center = {0.5 * g.side, 0.5 * g.side};
    g.m_center = {1.5 * g.side, 0.5 * g.side};
    return g;
  }

  // Distance from p to the segment joining the centres of S and T.
  double distance_to_central_segment(double x, double y) const noexcept {
    const double cx = std::clamp(x, k_center[0], m_center[0]);
    return std::hypot(x - cx, y - k_center[1]);
  }

  // Whether the closed segment p-q meets the central segment.
  bool crosses_central_segment(std::span<const double> p, std::span<const double> q) const noexcept {
    const double yc = k_center[1];
    const double dp = p[1] - yc, dq = q[1] - yc;
    if (dp * dq > 0.0) return false;
    if (dp == 0.0 && dq == 0.0)
      return std::max(p[0], q[0]) >= k_center[0] && std::min(p[0], q[0]) <= m_center[0];
    const double x = p[0] + (q[0] - p[0]) * (dp / (dp - dq));
    return x >= k_center[0] && x <= m_center[0];
  }
};

struct TrialInstance {
  PointSet blacks;
  PointSet reds;
};

// Blacks (intensity 1) then reds (intensity lambda), both from substream
// (master, index).
inline TrialInstance sample_trial(const TrialConfig& cfg, std::size_t index) {
  const auto geom = TrialGeometry::make(cfg.r, cfg.s);
  Rng rng(Seed{cfg.master, index});
  TrialInstance inst;
  inst.blacks = sample_ppp(PointKind::Black, 1.0, geom.window, rng);
  inst.reds = sample_ppp(PointKind::Red, cfg.lambda, geom.window, rng);
  return inst;
}

inline std::vector<std::uint32_t> points_in_disc(const PointSet& ps, std::array<double, 2> c, double radius) {
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.point(i);
    if (std::hypot(p[0] - c[0], p[1] - c[1]) <= radius) ids.push_back(static_cast<std::uint32_t>(i));
  }
  return ids;
}

// Arcs u->v with |u - v| <= dist(u, boundary); these exist whatever the
// configuration outside the window.
inline AdjacencyGraph censored_digraph(const SecrecyGraph& g) {
  const PointSet& b = g.blacks();
  return g.digraph_if([&](std::size_t u, const Neighbor& nb) {
    return nb.dist <= b.window().distance_to_boundary(b.point(u));
  });
}

inline AdjacencyGraph censored_graph(const SecrecyGraph& g, Variant v) {
  return variant_view(censored_digraph(g), graph_variant(v));
}

inline AdjacencyGraph censored_graph(PointSet blacks, PointSet reds, Variant v) {
  return censored_graph(build_graph(std::move(blacks), std::move(reds)), v);
}

// True when more than half of `sources` each reach more than half of
// `targets` in g (directed reachability, or connectivity if undirected).
inline bool majority_reaches_majority(const AdjacencyGraph& g, std::span<const std::uint32_t> sources,
                                      std::span<const std::uint32_t> targets) {
  if (sources.empty() || targets.empty()) return false;
  const std::size_t need_targets = targets.size() / 2 + 1;
  const std::size_t need_sources = sources.size() / 2 + 1;
  const ComponentLabeling lab = g.directed ? strongly_connected_components(g) : undirected_components(g);
  std::vector<std::size_t> per_comp(lab.component_count, 0);
  for (auto t : targets) ++per_comp[lab.labels[t]];

  std::optional<std::uint32_t> dominant;
  for (std::uint32_t c = 0; c < per_comp.size(); ++c)
    if (per_comp[c] >= need_targets) dominant = c;

  if (!g.directed) {
    if (!dominant) return false;
    std::size_t ok = 0;
    for (auto v : sources) ok += lab.labels[v] == *dominant ? 1 : 0;
    return ok >= need_sources;
  }

  if (dominant) {
    // Anything reaching a majority must reach the dominant component.
    std::uint32_t rep = 0;
    while (lab.labels[rep] != *dominant) ++rep;
    const std::uint32_t seed[] = {rep};
    const auto reaches = reach_from(reversed(g), seed);
    std::size_t ok = 0;
    for (auto v : sources) ok += reaches[v] ? 1 : 0;
    return ok >= need_sources;
  }

  // No single component holds a majority: search the condensation per source
  // component, stopping as soon as the answer is known.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> carcs;
  for (std::size_t u = 0; u < g.vertex_count(); ++u)
    for (auto w : g.neighbors(u))
      if (lab.labels[u] != lab.labels[w]) carcs.emplace_back(lab.labels[u], lab.labels[w]);
  const AdjacencyGraph dag = AdjacencyGraph::from_arcs(lab.component_count, std::move(carcs), true);

  std::vector<signed char> memo(lab.component_count, -1);
  std::vector<std::uint32_t> mark(lab.component_count, 0), queue;
  std::uint32_t epoch = 0;
  std::size_t ok = 0, bad = 0;
  for (auto v : sources) {
    const std::uint32_t c = lab.labels[v];
    if (memo[c] < 0) {
      ++epoch;
      queue.assign(1, c);
      mark[c] = epoch;
      std::size_t count = 0;
      bool hit = false;
      for (std::size_t h = 0; h < queue.size() && !hit; ++h) {
        count += per_comp[queue[h]];
        if (count >= need_targets) hit = true;
        for (auto w : dag.neighbors(queue[h]))
          if (mark[w] != epoch) {
            mark[w] = epoch;
            queue.push_back(w);
          }
      }
      memo[c] = hit ? 1 : 0;
    }
    (memo[c] ? ok : bad) += 1;
    if (ok >= need_sources) return true;
    if (bad > sources.size() - need_sources) return false;
  }
  return ok >= need_sources;
}

// Lower-bound success test on an already built window graph.
inline bool evaluate_lower(const SecrecyGraph& g, Variant variant, const TrialGeometry& geom) {
  const auto k = points_in_disc(g.blacks(), geom.k_center, geom.radius);
  const auto m = points_in_disc(g.blacks(), geom.m_center, geom.radius);
  if (k.empty() || m.empty()) return false;
  const AdjacencyGraph view = censored_graph(g, variant);
  // For O the first condition uses paths K -> M and the second M -> K.
  return majority_reaches_majority(view, k, m) && majority_reaches_majority(view, m, k);
}

inline bool trial_lower(const TrialConfig& cfg, std::size_t index) {
  if (cfg.bound_side != BoundSide::Lower) throw std::invalid_argument("trial_lower: config is not a lower-bound run");
  auto inst = sample_trial(cfg, index);
  const SecrecyGraph g = build_graph(std::move(inst.blacks), std::move(inst.reds));
  return evaluate_lower(g, cfg.variant, TrialGeometry::make(cfg.r, cfg.s));
}

// Basic good event: K holds a black point and every black in K reaches some
// black in M on the censored view.
inline bool evaluate_good_event(const SecrecyGraph& g, Variant variant, const TrialGeometry& geom) {
  const auto k = points_in_disc(g.blacks(), geom.k_center, geom.radius);
  const auto m = points_in_disc(g.blacks(), geom.m_center, geom.radius);
  if (k.empty()) return false;
  if (m.empty()) return false;
  // Vertices that reach M are exactly the reverse reach of M.
  const AdjacencyGraph view = censored_graph(g, variant);
  const auto reaches = reach_from(view.directed ? reversed(view) : view, m);
  return std::all_of(k.begin(), k.end(), [&](std::uint32_t v) { return reaches[v] != 0; });
}

// ---- exposure region ----

struct BoundarySample {
  double x = 0.0, y = 0.0;
  double rho = 0.0;  // distance to the nearest red in the window
};

struct CornerRecord {
  double x = 0.0, y = 0.0;
  double radius = 0.0;
};

// Over-approximation of the set of window points that can receive an edge
// from outside the window. An exterior x joined to y forces the open ball
// B(u, |u - y|) to be red-free, u being where the segment xy enters the
// window, so y lies in the closed disc of radius rho(u) about u. Boundary
// samples are spaced at most step/2 apart; rho is 1-Lipschitz, so inflating
// each sampled disc by step/2 covers every boundary point's disc.
struct ExposureRegion {
  std::vector<BoundarySample> boundary_samples;
  double step = 0.0;
  std::vector<CornerRecord> corners;

  double inflation() const noexcept { return 0.5 * step; }

  bool contains(std::span<const double> y) const noexcept {
    for (const auto& s : boundary_samples)
      if (std::hypot(y[0] - s.x, y[1] - s.y) <= s.rho + inflation()) return true;
    for (const auto& c : corners)
      if (std::hypot(y[0] - c.x, y[1] - c.y) <= c.radius) return true;
    return false;
  }

  // Per-point exposure flags for a point set indexed by `index`.
  std::vector<char> mark(const GridIndex& index) const {
    const PointSet& ps = index.points();
    std::vector<char> flags(ps.size(), 0);
    auto cover = [&](double x, double y, double radius) {
      if (std::isinf(radius)) {
        std::fill(flags.begin(), flags.end(), 1);
        return;
      }
      const double q[2] = {x, y};
      index.for_each_within(q, radius, [&](std::uint32_t id, double) { flags[id] = 1; });
    };
    for (const auto& s : boundary_samples) cover(s.x, s.y, s.rho + inflation());
    for (const auto& c : corners) cover(c.x, c.y, c.radius);
    return flags;
  }
};

// 0.05 times the mean nearest-red spacing (lambda * pi)^{-1/2}.
inline double default_exposure_step(double lambda, const Window& w) {
  if (!(lambda > 0.0)) return 0.01 * w.shortest_side();
  return 0.05 / std::sqrt(lambda * std::numbers::pi);
}

inline ExposureRegion exposure_region(const GridIndex& red_index, double step) {
  const Window& w = red_index.points().window();
  if (w.dim() != 2) throw std::invalid_argument("exposure_region: window must be two-dimensional");
  if (!(step > 0.0)) throw std::invalid_argument("exposure_region: step must be > 0");
  ExposureRegion region;
  region.step = step;
  const double x0 = w.lo(0), x1 = w.hi(0), y0 = w.lo(1), y1 = w.hi(1);
  const std::array<std::array<double, 4>, 4> sides = {{
      {x0, y0, x1, y0}, {x1, y0, x1, y1}, {x1, y1, x0, y1}, {x0, y1, x0, y0}}};
  auto rho_at = [&](double x, double y) {
    const double q[2] = {x, y};
    return guard_radius(q, red_index);
  };
  for (const auto& sd : sides) {
    const double len = std::hypot(sd[2] - sd[0], sd[3] - sd[1]);
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / (0.5 * step))));
    for (std::size_t i = 0; i < pieces; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(pieces);
      const double x = sd[0] + f * (sd[2] - sd[0]);
      const double y = sd[1] + f * (sd[3] - sd[1]);
      region.boundary_samples.push_back({x, y, rho_at(x, y)});
    }
    // Corner sectors are always exposed.
    const double rho = rho_at(sd[0], sd[1]);
    region.corners.push_back({sd[0], sd[1], rho + region.inflation()});
  }
  return region;
}

inline ExposureRegion exposure_region(const PointSet& reds, double step) {
  return exposure_region(GridIndex(reds), step);
}

// Upper-bound success test on an already built (uncensored) window graph.
// Fails if (a) some inflated boundary disc reaches the central segment, which
// would let an exterior edge pass over it, or (b) a path in the variant view
// starting at an exposed black traverses an edge that crosses it. For U an
// edge may also be oriented from the window vertex outwards, so blacks whose
// guard reaches the boundary count as exposed too.
inline bool evaluate_upper(const SecrecyGraph& g, Variant variant, const TrialGeometry& geom, double step) {
  const GridIndex red_index(g.reds());
  const ExposureRegion region = exposure_region(red_index, step);
  for (const auto& s : region.boundary_samples)
    if (s.rho + region.inflation() >= geom.distance_to_central_segment(s.x, s.y)) return false;

  const PointSet& blacks = g.blacks();
  const GridIndex black_index(blacks);
  std::vector<char> exposed = region.mark(black_index);
  if (variant == Variant::U)
    for (std::size_t v = 0; v < blacks.size(); ++v)
      if (g.guard(v) >= blacks.window().distance_to_boundary(blacks.point(v))) exposed[v] = 1;

  std::vector<std::uint32_t> sources;
  for (std::size_t v = 0; v < exposed.size(); ++v)
    if (exposed[v]) sources.push_back(static_cast<std::uint32_t>(v));
  const AdjacencyGraph view = variant_view(g.digraph(), graph_variant(variant));
  const auto reached = reach_from(view, sources);
  for (std::size_t u = 0; u < view.vertex_count(); ++u) {
    if (!reached[u]) continue;
    for (auto w : view.neighbors(u))
      if (geom.crosses_central_segment(blacks.point(u), blacks.point(w))) return false;
  }
  return true;
}

inline bool trial_upper(const TrialConfig& cfg, std::size_t index) {
  if (cfg.bound_side != BoundSide::Upper) throw std::invalid_argument("trial_upper: config is not an upper-bound run");
  auto inst = sample_trial(cfg, index);
  const SecrecyGraph g = build_graph(std::move(inst.blacks), std::move(inst.reds));
  const auto geom = TrialGeometry::make(cfg.r, cfg.s);
  const double step = cfg.step > 0.0 ? cfg.step : default_exposure_step(cfg.lambda, geom.window);
  return evaluate_upper(g, cfg.variant, geom, step);
}

inline bool run_trial(const TrialConfig& cfg, std::size_t index) {
  return cfg.bound_side == BoundSide::Lower ? trial_lower(cfg, index) : trial_upper(cfg, index);
}

// ---- confidence ----

struct ConfidenceReport {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double p0 = kOneIndependentThreshold;
  double log10_confidence = 0.0;
};

// log10 P(Bin(trials, p0) >= successes), summed in log space.
inline ConfidenceReport confidence(std::size_t successes, std::size_t trials,
                                   double p0 = kOneIndependentThreshold) {
  if (successes > trials) throw std::invalid_argument("confidence: successes exceed trials");
  if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("confidence: p0 must lie in (0, 1)");
  ConfidenceReport rep{successes, trials, p0, 0.0};
  if (successes == 0) return rep;
  const double n = static_cast<double>(trials);
  const double lp = std::log(p0), lq = std::log1p(-p0);
  auto log_term = [&](std::size_t j) {
    const double jj = static_cast<double>(j);
    return std::lgamma(n + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(n - jj + 1.0) + jj * lp + (n - jj) * lq;
  };
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = successes; j <= trials; ++j) peak = std::max(peak, log_term(j));
  double sum = 0.0;
  for (std::size_t j = successes; j <= trials; ++j) sum += std::exp(log_term(j) - peak);
  rep.log10_confidence = std::min(0.0, (peak + std::log(sum)) / std::numbers::ln10);
  return rep;
}

// ---- batches ----

struct TrialBatch {
  TrialConfig config;
  std::size_t successes = 0;
  std::vector<char> outcomes;  // per trial
  ConfidenceReport confidence;

  double frequency() const noexcept {
    return outcomes.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(outcomes.size());
  }
};

// Trial i always uses substream (master, i), so the result does not depend
// on the thread count or scheduling.
inline TrialBatch run_trials(const TrialConfig& cfg, unsigned threads = 1,
                             double p0 = kOneIndependentThreshold) {
  cfg.validate();
  TrialBatch batch;
  batch.config = cfg;
  batch.outcomes.assign(cfg.trials, 0);
  parallel_for(cfg.trials, threads, [&](std::size_t i) { batch.outcomes[i] = run_trial(cfg, i) ? 1 : 0; });
  for (char o : batch.outcomes) batch.successes += o ? 1 : 0;
  batch.confidence = confidence(batch.successes, cfg.trials, p0);
  return batch;
}

struct Table2Row {
  Variant variant;
  BoundSide side;
  double lambda, r, s;
  std::size_t successes, trials;
  int log10_confidence;  // rounded up
};

inline const std::vector<Table2Row>& table2_reference() {
  static const std::vector<Table2Row> rows = {
      {Variant::U, BoundSide::Lower, 0.20, 90, 10, 1480, 1500, -66},
      {Variant::O, BoundSide::Lower, 0.11, 60, 0, 963, 1000, -25},
      {Variant::B, BoundSide::Lower, 0.09, 80, 0, 2159, 2250, -51},
      {Variant::U, BoundSide::Upper, 0.27, 110, 0, 4296, 4600, -51},
      {Variant::O, BoundSide::Upper, 0.17, 110, 0, 3689, 4000, -25},
      {Variant::B, BoundSide::Upper, 0.13, 125, 0, 6226, 6750, -45},
  };
  return rows;
}

inline void write_table2_csv_header(std::ostream& os) {
  os << "variant,bound,lambda,r,s,successes,trials,log10_confidence\n";
}

inline void write_table2_csv_row(std::ostream& os, const TrialBatch& b) {
  os.precision(10);
  os << to_string(b.config.variant) << ',' << to_string(b.config.bound_side) << ',' << b.config.lambda << ','
     << b.config.r << ',' << b.config.s << ',' << b.successes << ',' << b.outcomes.size() << ','
     << b.confidence.log10_confidence << '\n';
}

inline nlohmann::json to_json(const TrialBatch& b, bool keep_trials) {
  nlohmann::json j = {{"variant", to_string(b.config.variant)},
                      {"bound", to_string(b.config.bound_side)},
                      {"lambda", b.config.lambda},
                      {"r", b.config.r},
                      {"s", b.config.s},
                      {"master_seed", b.config.master},
                      {"successes", b.successes},
                      {"trials", b.outcomes.size()},
                      {"p0", b.confidence.p0},
                      {"log10_confidence", b.confidence.log10_confidence}};
  if (keep_trials) {
    nlohmann::json t = nlohmann::json::array();
    for (std::size_t i = 0; i < b.outcomes.size(); ++i) t.push_back({{"trial", i}, {"success", b.outcomes[i] != 0}});
    j["outcomes"] = std::move(t);
  }
  return j;
}

}  // namespace secperc
