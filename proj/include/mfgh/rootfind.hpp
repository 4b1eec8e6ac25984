#pragma once

// Safeguarded scalar root finding. Both solvers keep a sign-changing bracket
// at all times and fall back to bisection whenever the model step (Newton or
// secant) leaves it, so convergence is unconditional on continuous input.

#include <cmath>
#include <string>
#include <utility>

#include "mfgh/errors.hpp"

namespace mfgh {

struct Bracket {
  double lo, hi;
  double flo, fhi;
};

// Expand [a, b] geometrically about its center until f changes sign across
// the interval. Throws BracketFailure after max_grow doublings.
template <class F>
inline Bracket grow_bracket(F&& f, double a, double b, int max_grow = 60) {
  double lo = std::min(a, b), hi = std::max(a, b);
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < max_grow; ++i) {
    if (!std::isfinite(flo) || !std::isfinite(fhi))
      fail(errc::bracket_failure, "non-finite residual while bracketing");
    if (flo == 0.0) return {lo, lo, 0.0, 0.0};
    if (fhi == 0.0) return {hi, hi, 0.0, 0.0};
    if ((flo < 0.0) != (fhi < 0.0)) return {lo, hi, flo, fhi};
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    lo = mid - 2.0 * half;
    hi = mid + 2.0 * half;
    flo = f(lo);
    fhi = f(hi);
  }
  fail(errc::bracket_failure, "no sign change after bracket growth");
}

// Newton iteration confined to a sign-changing bracket (rtsafe style).
template <class FDF>
inline double newton_bisect(FDF&& fdf, Bracket br, double xtol, double ftol,
                            int max_iter = 200) {
  if (br.flo == 0.0 && br.lo == br.hi) return br.lo;
  double lo = br.lo, hi = br.hi;
  double flo = br.flo;
  if (flo == 0.0) return lo;
  if (br.fhi == 0.0) return hi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    auto [fx, dfx] = fdf(x);
    if (std::abs(fx) <= ftol) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    double xn = (dfx != 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= xtol * std::max(1.0, std::abs(xn))) {
      return xn;
    }
    x = xn;
  }
  fail(errc::root_find_failure, "newton_bisect: no convergence");
}

// Secant iteration confined to a sign-changing bracket.
template <class F>
inline double secant_bisect(F&& f, Bracket br, double xtol, double ftol,
                            int max_iter = 200) {
  if (br.flo == 0.0 && br.lo == br.hi) return br.lo;
  double a = br.lo, b = br.hi, fa = br.flo, fb = br.fhi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double x0 = a, f0 = fa, x1 = b, f1 = fb;
  for (int it = 0; it < max_iter; ++it) {
    double xn;
    if (f1 != f0) {
      xn = x1 - f1 * (x1 - x0) / (f1 - f0);
    } else {
      xn = 0.5 * (a + b);
    }
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    double fn = f(xn);
    if (std::abs(fn) <= ftol || std::abs(b - a) <= xtol * std::max(1.0, std::abs(xn)))
      return xn;
    if ((fn < 0.0) == (fa < 0.0)) {
      a = xn;
      fa = fn;
    } else {
      b = xn;
      fb = fn;
    }
    x0 = x1;
    f0 = f1;
    x1 = xn;
    f1 = fn;
  }
  fail(errc::root_find_failure, "secant_bisect: no convergence");
}

}  // namespace mfgh
