#pragma once

#include <cmath>
#include <string>

#include "spindyn/errors.hpp"

namespace spindyn {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-14;
  int max_depth = 20;
};

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adapt(const F& f, double a, double fa, double b, double fb, double m, double fm,
             double whole, double tol, int depth, const QuadratureOptions& opts,
             bool& converged) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-300) {
    return left + right + delta / 15.0;
  }
  if (depth >= opts.max_depth) {
    converged = false;
    return left + right + delta / 15.0;
  }
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, opts, converged) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, opts, converged);
}

}  // namespace detail

// Adaptive Simpson on [a, b]. Throws NumericError when the refinement cap is
// reached before the tolerance is met.
template <class F>
double adaptive_simpson(const F& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = detail::simpson(a, fa, b, fb, fm);
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(whole));
  bool converged = true;
  const double v =
      detail::adapt(f, a, fa, b, fb, m, fm, whole, tol, 0, opts, converged);
  // re-check against the final value; the initial tolerance can be a poor
  // scale when the crude whole-interval estimate is far off
  if (!converged) {
    bool converged2 = true;
    const double tol2 = std::max(opts.abs_tol, opts.rel_tol * std::abs(v));
    const double v2 =
        detail::adapt(f, a, fa, b, fb, m, fm, whole, tol2, 0, opts, converged2);
    if (!converged2) {
      throw NumericError("adaptive_simpson: refinement cap " +
                         std::to_string(opts.max_depth) +
                         " reached on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
    }
    return v2;
  }
  return v;
}

}  // namespace spindyn
