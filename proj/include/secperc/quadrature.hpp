#pragma once

// Adaptive Simpson quadrature with Richardson correction.

#include <cmath>
#include <cstddef>

namespace secperc {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // sum of local |S2 - S1| / 15 estimates
  bool converged = true;
  std::size_t evaluations = 0;
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  int max_depth;
  int min_depth;
  std::size_t max_evaluations;
  QuadratureResult result;

  void recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    result.evaluations += 2;
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= min_depth && std::abs(delta) <= 15.0 * tol) {
      result.value += left + right + delta / 15.0;
      result.error += std::abs(delta) / 15.0;
      return;
    }
    if (depth >= max_depth || !std::isfinite(delta) || result.evaluations >= max_evaluations) {
      result.converged = false;
      result.value += left + right + delta / 15.0;
      result.error += std::abs(delta) / 15.0;
      return;
    }
    recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
    recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace detail

// Integrates f over [a, b] to absolute tolerance tol. Intervals that hit
// max_depth, or that are reached after the evaluation budget is spent,
// without meeting their share of tol mark the result unconverged.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48, int min_depth = 5,
                                  std::size_t max_evaluations = 4'000'000) {
  QuadratureResult out;
  if (!(b > a)) return out;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  detail::SimpsonState<F> st{f, max_depth, min_depth, max_evaluations, {}};
  st.result.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  st.recurse(a, b, fa, fm, fb, whole, tol, 0);
  return st.result;
}

}  // namespace secperc
