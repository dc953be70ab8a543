#pragma once

// Poisson point processes in axis-aligned boxes of R^d.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "secperc/rng.hpp"

namespace secperc {

// Volume of the unit ball in R^d: pi^{d/2} / Gamma(1 + d/2).
inline double ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("ball_volume: dimension must be >= 1");
  return std::exp(0.5 * d * std::log(std::numbers::pi) - std::lgamma(1.0 + 0.5 * d));
}

// Surface area of the unit sphere in R^d: 2 pi^{d/2} / Gamma(d/2).
inline double sphere_surface_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_surface_area: dimension must be >= 1");
  return 2.0 * std::exp(0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d));
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

// Axis-aligned box. Membership is half-open, [lo_i, hi_i), so congruent
// windows tile without double counting.
class Window {
 public:
  Window() = default;

  Window(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.empty() || lo_.size() != hi_.size())
      throw std::invalid_argument("Window: bounds must be non-empty and of equal dimension");
    for (std::size_t i = 0; i < lo_.size(); ++i) {
      if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || !(hi_[i] > lo_[i]))
        throw std::invalid_argument("Window: require finite lo < hi on every axis");
    }
  }

  // Box [0, side_0) x [0, side_1) x ...
  static Window from_sides(std::vector<double> sides) {
    std::vector<double> lo(sides.size(), 0.0);
    return Window(std::move(lo), std::move(sides));
  }

  int dim() const noexcept { return static_cast<int>(lo_.size()); }
  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }
  double lo(int axis) const { return lo_.at(axis); }
  double hi(int axis) const { return hi_.at(axis); }
  double side(int axis) const { return hi_.at(axis) - lo_.at(axis); }

  double volume() const noexcept {
    double v = 1.0;
    for (std::size_t i = 0; i < lo_.size(); ++i) v *= hi_[i] - lo_[i];
    return v;
  }

  double shortest_side() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lo_.size(); ++i) m = std::min(m, hi_[i] - lo_[i]);
    return m;
  }

  bool contains(std::span<const double> p) const noexcept {
    if (p.size() != lo_.size()) return false;
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!(p[i] >= lo_[i] && p[i] < hi_[i])) return false;
    return true;
  }

  // Distance from an interior point to the nearest face.
  double distance_to_boundary(std::span<const double> p) const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lo_.size(); ++i)
      m = std::min({m, p[i] - lo_[i], hi_[i] - p[i]});
    return m;
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

enum class PointKind { Black, Red };

inline const char* to_string(PointKind k) noexcept { return k == PointKind::Black ? "black" : "red"; }

inline PointKind point_kind_from_string(const std::string& s) {
  if (s == "black") return PointKind::Black;
  if (s == "red") return PointKind::Red;
  throw std::invalid_argument("unknown point kind: " + s);
}

// A finite sample of a Poisson process: black points are the legitimate
// nodes, red points the eavesdroppers. Coordinates are stored row-major.
class PointSet {
 public:
  PointSet() = default;

  PointSet(PointKind kind, double intensity, Window window, std::vector<double> coords = {})
      : kind_(kind), intensity_(intensity), window_(std::move(window)), coords_(std::move(coords)) {
    if (!(intensity_ >= 0.0)) throw std::invalid_argument("PointSet: intensity must be >= 0");
    const auto d = static_cast<std::size_t>(window_.dim());
    if (d == 0) throw std::invalid_argument("PointSet: window has no dimension");
    if (coords_.size() % d != 0)
      throw std::invalid_argument("PointSet: coordinate count is not a multiple of the dimension");
    for (std::size_t i = 0; i < size(); ++i)
      if (!window_.contains(point(i))) throw std::invalid_argument("PointSet: point outside window");
  }

  PointKind kind() const noexcept { return kind_; }
  double intensity() const noexcept { return intensity_; }
  const Window& window() const noexcept { return window_; }
  int dim() const noexcept { return window_.dim(); }
  std::size_t size() const noexcept {
    return coords_.empty() ? 0 : coords_.size() / static_cast<std::size_t>(window_.dim());
  }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const noexcept {
    const auto d = static_cast<std::size_t>(window_.dim());
    return {coords_.data() + i * d, d};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

  // Adds a point; it must lie inside the window.
  void push_back(std::span<const double> p) {
    if (!window_.contains(p)) throw std::invalid_argument("PointSet: point outside window");
    coords_.insert(coords_.end(), p.begin(), p.end());
  }
  void push_back(std::initializer_list<double> p) {
    push_back(std::span<const double>(p.begin(), p.size()));
  }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  PointKind kind_ = PointKind::Black;
  double intensity_ = 0.0;
  Window window_;
  std::vector<double> coords_;
};

// Largest expected count we accept; vertex ids are 32-bit.
inline constexpr double kMaxExpectedCount = 4.0e9;

// Draws N ~ Poisson(intensity * volume) from `rng`, then N i.i.d. uniform
// positions. Shared by sample_ppp and the trial drivers, which draw several
// processes from one stream.
inline PointSet sample_ppp(PointKind kind, double intensity, const Window& window, Rng& rng) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw std::invalid_argument("sample_ppp: intensity must be finite and >= 0");
  const double mean = intensity * window.volume();
  if (!(mean <= kMaxExpectedCount))
    throw std::overflow_error("sample_ppp: expected point count overflows the count type");
  std::size_t n = 0;
  if (mean > 0.0) {
    std::poisson_distribution<std::uint64_t> count(mean);
    n = static_cast<std::size_t>(count(rng));
  }
  const auto d = static_cast<std::size_t>(window.dim());
  std::vector<double> coords(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      double x = rng.uniform(window.lo()[a], window.hi()[a]);
      // Guard the half-open upper face against rounding.
      if (x >= window.hi()[a]) x = std::nextafter(window.hi()[a], window.lo()[a]);
      coords[i * d + a] = x;
    }
  }
  return PointSet(kind, intensity, window, std::move(coords));
}

inline PointSet sample_ppp(PointKind kind, double intensity, const Window& window, Seed seed) {
  Rng rng(seed);
  return sample_ppp(kind, intensity, window, rng);
}

// Distances from the origin to the 1st..k-th nearest points of a homogeneous
// Poisson process in R^d, from one realization. Uses
// intensity * ball_volume(d) * d_j^d = E_1 + ... + E_j with E_i ~ Exp(1).
inline std::vector<double> radial_nearest_distances(int d, double intensity, int k, Rng& rng) {
  if (!(intensity > 0.0)) throw std::invalid_argument("radial_nearest_distances: intensity must be > 0");
  if (k < 1) throw std::invalid_argument("radial_nearest_distances: k must be >= 1");
  const double scale = intensity * ball_volume(d);
  std::vector<double> out(static_cast<std::size_t>(k));
  double cum = 0.0;
  for (auto& r : out) {
    cum += rng.exponential();
    r = std::pow(cum / scale, 1.0 / d);
  }
  return out;
}

inline double radial_nearest_distance(int d, double intensity, int k, Seed seed) {
  Rng rng(seed);
  return radial_nearest_distances(d, intensity, k, rng).back();
}

// ---- serialization ----

inline void write_csv(std::ostream& os, const PointSet& ps) {
  const int d = ps.dim();
  for (int a = 0; a < d; ++a) os << (a ? "," : "") << 'x' << (a + 1);
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.point(i);
    for (int a = 0; a < d; ++a) os << (a ? "," : "") << p[a];
    os << '\n';
  }
}

inline nlohmann::json to_json(const Window& w) {
  return {{"dim", w.dim()}, {"lo", w.lo()}, {"hi", w.hi()}};
}

inline Window window_from_json(const nlohmann::json& j) {
  return Window(j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>());
}

inline nlohmann::json to_json(const PointSet& ps, Seed seed) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return {{"kind", to_string(ps.kind())},
          {"intensity", ps.intensity()},
          {"window", to_json(ps.window())},
          {"seed", {{"master", seed.master}, {"stream", seed.stream}}},
          {"points", std::move(pts)}};
}

inline PointSet point_set_from_json(const nlohmann::json& j) {
  Window w = window_from_json(j.at("window"));
  PointSet ps(point_kind_from_string(j.at("kind").get<std::string>()), j.at("intensity").get<double>(), w);
  for (const auto& p : j.at("points")) {
    const auto v = p.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != w.dim()) throw std::invalid_argument("point has wrong dimension");
    ps.push_back(std::span<const double>(v));
  }
  return ps;
}

}  // namespace secperc
