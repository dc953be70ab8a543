#pragma once

// Uniform-grid spatial index over a PointSet, with exact expanding-ring
// nearest-neighbour search and radius queries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "secperc/ppp.hpp"

namespace secperc {

// Mean spacing (intensity * ball_volume(d))^{-1/d}, clamped to the window's
// longest side. Zero intensity gives one cell spanning the window.
inline double default_cell_size(double intensity, const Window& w) {
  double longest = 0.0;
  for (int a = 0; a < w.dim(); ++a) longest = std::max(longest, w.side(a));
  if (!(intensity > 0.0)) return longest;
  return std::min(longest, std::pow(intensity * ball_volume(w.dim()), -1.0 / w.dim()));
}

struct Neighbor {
  std::uint32_t id = 0;
  double dist = 0.0;
};

inline constexpr int kMaxGridDim = 8;

class GridIndex {
 public:
  using CellCoords = std::array<std::int64_t, kMaxGridDim>;

  GridIndex(const PointSet& points, double cell_size) : points_(&points), window_(points.window()) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size))
      throw std::invalid_argument("GridIndex: cell_size must be finite and > 0");
    const int d = window_.dim();
    if (d > kMaxGridDim) throw std::invalid_argument("GridIndex: dimension too large for a grid index");
    // Keep the cell count proportional to the point count.
    const double max_cells = std::max(64.0, 4.0 * static_cast<double>(points.size()));
    for (;;) {
      double total = 1.0;
      for (int a = 0; a < d; ++a) total *= std::max(1.0, std::ceil(window_.side(a) / cell_size));
      if (total <= max_cells) break;
      cell_size *= 1.25;
    }
    cell_ = cell_size;
    dims_.resize(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
      dims_[a] = static_cast<std::int64_t>(std::max(1.0, std::ceil(window_.side(a) / cell_)));
      total *= static_cast<std::size_t>(dims_[a]);
    }

    std::vector<std::size_t> cell_of(points.size());
    CellCoords c{};
    start_.assign(total + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_coords(points.point(i), c);
      cell_of[i] = linear(c);
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t k = 0; k < total; ++k) start_[k + 1] += start_[k];
    ids_.resize(points.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) ids_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  explicit GridIndex(const PointSet& points)
      : GridIndex(points, default_cell_size(points.intensity(), points.window())) {}

  // The index refers to the point set; it must outlive the index.
  GridIndex(const PointSet&&, double) = delete;
  GridIndex(const PointSet&&) = delete;

  double cell_size() const noexcept { return cell_; }
  const PointSet& points() const noexcept { return *points_; }
  std::size_t cell_count() const noexcept { return start_.size() - 1; }

  std::span<const std::uint32_t> cell(std::size_t linear_index) const noexcept {
    return {ids_.data() + start_[linear_index], start_[linear_index + 1] - start_[linear_index]};
  }

  // Cell of p: floor((p - lo) / cell_size) per axis, clamped to the grid.
  void cell_coords(std::span<const double> p, CellCoords& out) const {
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      const double f = std::floor((p[a] - window_.lo()[a]) / cell_);
      out[a] = std::clamp<std::int64_t>(
          f < -1e18 ? -1 : (f > 1e18 ? dims_[a] : static_cast<std::int64_t>(f)), 0, dims_[a] - 1);
    }
  }

  // Exact nearest indexed point to q, skipping id `exclude` if given.
  std::optional<Neighbor> nearest(std::span<const double> q,
                                  std::optional<std::uint32_t> exclude = std::nullopt) const {
    if (points_->empty()) return std::nullopt;
    const std::size_t d = dims_.size();
    CellCoords center{}, cur{};
    cell_coords(q, center);
    std::int64_t max_ring = 0;
    for (std::size_t a = 0; a < d; ++a)
      max_ring = std::max({max_ring, center[a], dims_[a] - 1 - center[a]});

    double best2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = 0;
    bool found = false;
    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
      for_each_shell_cell(center, ring, cur, 0, false, [&](std::size_t lin) {
        for (std::uint32_t id : cell(lin)) {
          if (exclude && *exclude == id) continue;
          const double d2 = squared_distance(q, points_->point(id));
          if (d2 < best2 || (d2 == best2 && id < best_id)) {
            best2 = d2;
            best_id = id;
            found = true;
          }
        }
      });
      // Cells in later rings are at least ring * cell_size away.
      if (found) {
        const double reach = static_cast<double>(ring) * cell_;
        if (best2 <= reach * reach) break;
      }
    }
    if (!found) return std::nullopt;
    return Neighbor{best_id, std::sqrt(best2)};
  }

  // Calls fn(id, dist) for every indexed point with dist <= radius.
  template <class Fn>
  void for_each_within(std::span<const double> q, double radius, Fn&& fn) const {
    if (points_->empty() || !(radius >= 0.0)) return;
    const std::size_t d = dims_.size();
    CellCoords lo{}, hi{}, cur{};
    for (std::size_t a = 0; a < d; ++a) {
      if (std::isinf(radius)) {
        lo[a] = 0;
        hi[a] = dims_[a] - 1;
        continue;
      }
      const double flo = std::floor((q[a] - radius - window_.lo()[a]) / cell_);
      const double fhi = std::floor((q[a] + radius - window_.lo()[a]) / cell_);
      lo[a] = static_cast<std::int64_t>(std::clamp(flo, 0.0, static_cast<double>(dims_[a] - 1)));
      hi[a] = static_cast<std::int64_t>(std::clamp(fhi, 0.0, static_cast<double>(dims_[a] - 1)));
      if (fhi < 0.0 || flo > static_cast<double>(dims_[a] - 1)) return;
    }
    const double r2 = radius * radius;
    for_each_box_cell(lo, hi, cur, 0, [&](std::size_t lin) {
      for (std::uint32_t id : cell(lin)) {
        const double d2 = squared_distance(q, points_->point(id));
        if (d2 <= r2) fn(id, std::sqrt(d2));
      }
    });
  }

 private:
  std::size_t linear(const CellCoords& c) const noexcept {
    std::size_t lin = 0;
    for (std::size_t a = dims_.size(); a-- > 0;) lin = lin * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(c[a]);
    return lin;
  }

  // Visits cells at Chebyshev distance exactly `ring` from `center`.
  template <class Fn>
  void for_each_shell_cell(const CellCoords& center, std::int64_t ring, CellCoords& cur, std::size_t axis, bool on_shell, Fn&& fn) const {
    const std::size_t d = dims_.size();
    if (axis == d) {
      fn(linear(cur));
      return;
    }
    const bool last = axis + 1 == d;
    for (std::int64_t off = -ring; off <= ring; ++off) {
      const bool edge = off == -ring || off == ring;
      if (last && !on_shell && !edge) continue;
      const std::int64_t c = center[axis] + off;
      if (c < 0 || c >= dims_[axis]) continue;
      cur[axis] = c;
      for_each_shell_cell(center, ring, cur, axis + 1, on_shell || edge, fn);
      if (ring == 0) break;
    }
  }

  template <class Fn>
  void for_each_box_cell(const CellCoords& lo, const CellCoords& hi, CellCoords& cur, std::size_t axis, Fn&& fn) const {
    if (axis == dims_.size()) {
      fn(linear(cur));
      return;
    }
    for (std::int64_t c = lo[axis]; c <= hi[axis]; ++c) {
      cur[axis] = c;
      for_each_box_cell(lo, hi, cur, axis + 1, fn);
    }
  }

  const PointSet* points_;
  Window window_;
  double cell_ = 1.0;
  std::vector<std::int64_t> dims_;
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> ids_;
};

}  // namespace secperc
