#pragma once

#include <cmath>
#include <functional>

#include "evolver/error.hpp"
#include "evolver/linop.hpp"

namespace evolver {

namespace detail {
inline double max_abs(double x) { return std::abs(x); }
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

template <typename Value, typename Fn>
Value simpson_step(const Fn& f, double a, double b, const Value& fa, const Value& fm,
                   const Value& fb, const Value& whole, double tol, int depth, int& evals) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const Value flm = f(lm);
  const Value frm = f(rm);
  evals += 2;
  const Value left = ((m - a) / 6.0) * (fa + 4.0 * flm + fm);
  const Value right = ((b - m) / 6.0) * (fm + 4.0 * frm + fb);
  const Value both = left + right;
  const double err = max_abs(Value(both - whole));
  if (depth <= 0) {
    fail(ErrorKind::kDivergence, "adaptive Simpson exceeded its recursion depth");
  }
  if (err <= 15.0 * tol) return Value(both + (1.0 / 15.0) * (both - whole));
  return Value(simpson_step<Value>(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals) +
               simpson_step<Value>(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals));
}
}  // namespace detail

/// Adaptive Simpson quadrature of a scalar-, vector- or matrix-valued
/// integrand on [a, b]. The integrand is pre-split into `initial_panels`
/// panels so periodic integrands are not mistaken for polynomials.
template <typename Value, typename Fn>
Value adaptive_simpson(const Fn& f, double a, double b, double tol, int initial_panels = 8,
                       int max_depth = 40) {
  const double h = (b - a) / initial_panels;
  int evals = 0;
  Value fa = f(a);
  Value total = 0.0 * fa;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == initial_panels) ? b : lo + h;
    const double mid = 0.5 * (lo + hi);
    const Value fm = f(mid);
    const Value fb = f(hi);
    const Value whole = ((hi - lo) / 6.0) * (fa + 4.0 * fm + fb);
    total = Value(total + detail::simpson_step<Value>(f, lo, hi, fa, fm, fb, whole,
                                                      tol / initial_panels, max_depth, evals));
    fa = fb;
  }
  return total;
}

}  // namespace evolver
