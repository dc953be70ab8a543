#pragma once

// Rolling-ball failure bound for the basic good event of a pair of adjacent
// squares, and the hexagonal-lattice upper bound on the U threshold.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "secperc/errors.hpp"
#include "secperc/nelder_mead.hpp"
#include "secperc/quadrature.hpp"
#include "secperc/variant.hpp"

namespace secperc {

// Area of the intersection of two discs with radii r1, r2 whose centres are
// dist apart (sum of two circular segments).
inline double disc_intersection_area(double r1, double r2, double dist) {
  if (r1 < 0.0 || r2 < 0.0 || dist < 0.0) throw std::invalid_argument("disc_intersection_area: negative argument");
  if (dist >= r1 + r2) return 0.0;
  const double small = std::min(r1, r2);
  if (dist <= std::abs(r1 - r2)) return std::numbers::pi * small * small;
  const double c1 = std::clamp((dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist * r1), -1.0, 1.0);
  const double c2 = std::clamp((dist * dist + r2 * r2 - r1 * r1) / (2.0 * dist * r2), -1.0, 1.0);
  const double k = (-dist + r1 + r2) * (dist + r1 - r2) * (dist - r1 + r2) * (dist + r1 + r2);
  const double area = r1 * r1 * std::acos(c1) + r2 * r2 * std::acos(c2) - 0.5 * std::sqrt(std::max(0.0, k));
  // Cancellation near tangency can leave the formula marginally out of range.
  return std::clamp(area, 0.0, std::numbers::pi * small * small);
}

// Regions around a candidate parent u at distance t from v. v lies on the
// boundary of the rolling disc D_v (radius r); A = B(v,t), C = B(u,t),
// B = A intersect D_v. All areas depend on (t, r) only.
struct LuneGeometry {
  double r = 0.0;
  double t = 0.0;

  double area_a() const noexcept { return std::numbers::pi * t * t; }
  double area_c() const noexcept { return area_a(); }
  double area_union() const noexcept { return (4.0 * std::numbers::pi / 3.0 + std::sqrt(3.0) / 2.0) * t * t; }
  double area_b() const { return disc_intersection_area(t, r, r); }
};

// Probability density (per unit area of u) that u is the black point of D_v
// closest to v while the required secrecy edge(s) between u and v fail.
//   B: either direction fails      (1 - e^{-lambda|A u C|}) e^{-|B|}
//   U: both directions fail        (1 - 2e^{-lambda|A|} + e^{-lambda|A u C|}) e^{-|B|}
//   O: the edge towards v fails    (1 - e^{-lambda|A|}) e^{-|B|}
inline double rolling_ball_integrand(Variant variant, double lambda, double r, double t) {
  if (t <= 0.0) return 0.0;
  const LuneGeometry g{r, t};
  const double a = std::exp(-lambda * g.area_a());
  const double u = std::exp(-lambda * g.area_union());
  const double b = std::exp(-g.area_b());
  switch (variant) {
    case Variant::B: return -std::expm1(-lambda * g.area_union()) * b;
    case Variant::U: return std::max(0.0, 1.0 - 2.0 * a + u) * b;
    case Variant::O: return -std::expm1(-lambda * g.area_a()) * b;
  }
  return 0.0;
}

struct BoundReport {
  Variant variant = Variant::B;
  double lambda = 0.0;
  double r = 0.0;
  double s = 0.0;
  double p = 1.0;       // min(1, bound)
  double bound = 0.0;   // unclipped right-hand side
  double quadrature_error = 0.0;
};

inline constexpr double kDefaultBoundTol = 1e-9;

// Upper bound on the failure probability of the basic good event:
//   e^{-pi r^2} + 2r(2r+2s) (e^{-|D_v n B(v,s)|} + integral over u in D_v n B(v,s) of p(u) du).
// The integrand depends on |u - v| = t only, and the circle of radius t about
// v meets D_v in an arc of length 2t arccos(t/2r), so the area integral is
//   integral_0^{min(s,2r)} p(t) 2t arccos(t/(2r)) dt.
inline BoundReport rolling_ball_bound(Variant variant, double lambda, double r, double s, double tol = kDefaultBoundTol) {
  if (!(r > 0.0) || !(s >= 0.0)) throw std::invalid_argument("rolling_ball_bound: require r > 0 and s >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("rolling_ball_bound: tol must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("rolling_ball_bound: lambda must be >= 0");
  const double upper = std::min(s, 2.0 * r);
  auto f = [&](double t) {
    return rolling_ball_integrand(variant, lambda, r, t) * 2.0 * t * std::acos(std::min(1.0, t / (2.0 * r)));
  };
  const double weight = 2.0 * r * (2.0 * r + 2.0 * s);
  // Quadrature tolerance is scaled so the error in the bound itself is <= tol.
  const auto q = adaptive_simpson(f, 0.0, upper, tol / weight);
  if (!q.converged) throw NumericalError("rolling_ball_bound: quadrature did not converge");

  BoundReport rep;
  rep.variant = variant;
  rep.lambda = lambda;
  rep.r = r;
  rep.s = s;
  rep.bound = std::exp(-std::numbers::pi * r * r) + weight * (std::exp(-disc_intersection_area(r, s, r)) + q.value);
  rep.p = std::min(1.0, rep.bound);
  rep.quadrature_error = weight * q.error;
  return rep;
}

struct OptimizeOptions {
  double r_lo = 0.5, r_hi = 5.0;
  double s_lo = 0.0, s_hi = 8.0;
  int grid = 64;
  double tol = kDefaultBoundTol;
};

// Grid search over (r, s), then Nelder-Mead from the best grid cell with a
// simplex spanning one grid step. No randomness.
inline BoundReport optimize_bound(Variant variant, double lambda, const OptimizeOptions& opt = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("optimize_bound: lambda must be > 0");
  const double dr = (opt.r_hi - opt.r_lo) / (opt.grid - 1);
  const double ds = (opt.s_hi - opt.s_lo) / (opt.grid - 1);
  double best = std::numeric_limits<double>::infinity();
  double best_r = opt.r_lo, best_s = opt.s_lo;
  for (int i = 0; i < opt.grid; ++i) {
    for (int j = 0; j < opt.grid; ++j) {
      const double r = opt.r_lo + i * dr, s = opt.s_lo + j * ds;
      const double b = rolling_ball_bound(variant, lambda, r, s, opt.tol).bound;
      if (b < best) {
        best = b;
        best_r = r;
        best_s = s;
      }
    }
  }
  auto objective = [&](const std::vector<double>& x) {
    if (!(x[0] > 0.0) || !(x[1] >= 0.0)) return std::numeric_limits<double>::infinity();
    return rolling_ball_bound(variant, lambda, x[0], x[1], opt.tol).bound;
  };
  NelderMeadOptions nm;
  nm.x_tol = 1e-6;
  nm.f_tol = 1e-11;
  nm.max_iterations = 2000;
  const auto res = nelder_mead(objective, {best_r, best_s}, {dr, ds}, nm);
  if (res.value <= best) {
    best_r = res.x[0];
    best_s = res.x[1];
  }
  return rolling_ball_bound(variant, lambda, best_r, best_s, opt.tol);
}

// Table-1 rows: (variant, lambda, r, s, p) with p rounded up.
struct Table1Row {
  Variant variant;
  double lambda, r, s, p;
};

inline const std::vector<Table1Row>& table1_reference() {
  static const std::vector<Table1Row> rows = {
      {Variant::U, 0.002, 1.659, 3.15, 0.0669},
      {Variant::O, 0.0008, 1.658, 3.15, 0.0677},
      {Variant::B, 0.0005, 1.657, 3.15, 0.0680},
  };
  return rows;
}

// ---- hexagonal lattice ----

// Probability that a hexagon of side delta is closed: no black point and at
// least one red point in each of its six equilateral triangles.
inline double hexagon_closed_probability(double lambda, double delta) {
  const double tri = std::sqrt(3.0) * delta * delta / 4.0;
  return std::pow(-std::expm1(-lambda * tri), 6.0) * std::exp(-6.0 * tri);
}

// Maximiser of hexagon_closed_probability in delta: e^{-lambda sqrt3 delta^2/4} = 1/(1+lambda).
inline double hexagon_optimal_delta(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("hexagon_optimal_delta: lambda must be > 0");
  return std::sqrt(4.0 * std::log1p(lambda) / (lambda * std::sqrt(3.0)));
}

// hexagon_closed_probability at the optimal delta:
// (lambda/(1+lambda))^6 (1/(1+lambda))^{6/lambda}.
inline double hexagon_optimal_value(double lambda) {
  return std::exp(6.0 * std::log(lambda / (1.0 + lambda)) - 6.0 / lambda * std::log1p(lambda));
}

// Smallest lambda at which the optimal closed probability reaches 1/2, the
// critical probability of hexagonal face percolation; an upper bound on the
// U threshold. Bisection to `tol`.
inline double hexagon_bound(double tol = 1e-9) {
  double lo = 1.0, hi = 1e4;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (hexagon_optimal_value(mid) >= 0.5 ? hi : lo) = mid;
  }
  return hi;
}

// ---- serialization ----

inline nlohmann::json to_json(const BoundReport& b) {
  return {{"variant", to_string(b.variant)}, {"lambda", b.lambda}, {"r", b.r}, {"s", b.s},
          {"p", b.p}, {"bound", b.bound}, {"quadrature_error", b.quadrature_error}};
}

inline void write_bound_csv_header(std::ostream& os) { os << "variant,lambda,r,s,p\n"; }

inline void write_bound_csv_row(std::ostream& os, const BoundReport& b) {
  os.precision(10);
  os << to_string(b.variant) << ',' << b.lambda << ',' << b.r << ',' << b.s << ',' << b.p << '\n';
}

}  // namespace secperc
