#pragma once

// One-dimensional current method. With d = 1 the transport equation forces
// the current j = m (P + u_x) to be a constant, which reduces the coupled
// system to two nested scalar root-finds:
//
//   inner: given j, the map F_j(t) = j^2/(2 t^2) - ln t is a decreasing
//          bijection of (0, inf) onto R, so m = F_j^{-1}(Hbar - V) and the
//          mass constraint  integral F_j^{-1}(Hbar - V) = 1  pins Hbar
//          (strictly decreasing in Hbar: safeguarded Newton in a bracket);
//   outer: the periodicity constraint  j * integral 1/m = P  pins j
//          (safeguarded secant on a geometrically grown bracket).
//
// u is recovered by a spectral antiderivative of j/m - P with mean-zero
// normalization. The same machinery solves the eps-problem (V sampled along
// x, x/eps), the two-scale limit (V sampled on the (x, y) tensor grid), and
// the 1D cell problem (V sampled in y at frozen x) — these closed forms are
// the ground-truth oracle for every variational solver in the project.

#include <cmath>
#include <functional>
#include <vector>

#include "mfgh/errors.hpp"
#include "mfgh/potential.hpp"
#include "mfgh/rootfind.hpp"
#include "mfgh/torus.hpp"

namespace mfgh {

// Solves F_j(t) = j^2/(2 t^2) - ln t = z for t > 0, to
// |F_j(t) - z| <= 1e-13 * max(1, |z|). Newton safeguarded by a bracket grown
// geometrically from the guess (default t = 1).
inline double f_inverse(double j, double z, double guess = 1.0) {
  if (j == 0.0) return std::exp(-z);  // F_0(t) = -ln t
  const double j2 = j * j;
  auto F = [j2](double t) { return 0.5 * j2 / (t * t) - std::log(t); };
  const double ftol = 1e-13 * std::max(1.0, std::abs(z));

  double t = guess > 0.0 ? guess : 1.0;
  double Ft = F(t);
  if (std::abs(Ft - z) <= ftol) return t;
  // F is decreasing: root lies right of t when F(t) > z.
  double lo, hi, flo, fhi;
  if (Ft > z) {
    lo = t;
    flo = Ft - z;
    hi = 2.0 * t;
    fhi = F(hi) - z;
    for (int i = 0; fhi > 0.0 && i < 200; ++i) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = F(hi) - z;
    }
    if (fhi > 0.0) fail(errc::bracket_failure, "f_inverse: no upper bracket");
  } else {
    hi = t;
    fhi = Ft - z;
    lo = 0.5 * t;
    flo = F(lo) - z;
    for (int i = 0; flo < 0.0 && i < 200; ++i) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      flo = F(lo) - z;
    }
    if (flo < 0.0) fail(errc::bracket_failure, "f_inverse: no lower bracket");
  }
  auto fdf = [j2, z](double t) {
    const double f = 0.5 * j2 / (t * t) - std::log(t) - z;
    const double df = -j2 / (t * t * t) - 1.0 / t;
    return std::pair<double, double>(f, df);
  };
  return newton_bisect(fdf, Bracket{lo, hi, flo, fhi}, 1e-15, ftol);
}

namespace detail {

// Shared nested root-find over a sampled potential. `vals` carries the
// potential samples, `weight` their common quadrature weight (sums to 1),
// `target` the drift constraint j * sum(weight / m) = target.
struct NestedCurrentResult {
  double j = 0.0;
  double H = 0.0;
  std::vector<double> m;
};

inline NestedCurrentResult nested_current_solve(const std::vector<double>& vals,
                                                double weight, double target) {
  require(all_finite(vals), errc::non_finite_input,
          "current solve: non-finite potential samples");
  const std::size_t N = vals.size();
  double vmin = vals[0], vmax = vals[0];
  for (double v : vals) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }

  NestedCurrentResult out;
  out.m.assign(N, 1.0);

  if (target == 0.0) {
    // zero drift: j = 0, m = e^{V - H}, H = ln sum w e^{V} (log-sum-exp)
    double acc = 0.0;
    for (double v : vals) acc += std::exp(v - vmax);
    out.H = vmax + std::log(weight * acc);
    for (std::size_t i = 0; i < N; ++i) out.m[i] = std::exp(vals[i] - out.H);
    return out;
  }

  std::vector<double> warm(N, 1.0);

  // inner solve: H(j) with sum w * F_j^{-1}(H - V_i) = 1, decreasing in H
  auto solve_H = [&](double j) {
    auto mass_fdf = [&](double H) {
      double M = 0.0, dM = 0.0;
      const double j2 = j * j;
      for (std::size_t i = 0; i < N; ++i) {
        const double t = f_inverse(j, H - vals[i], warm[i]);
        warm[i] = t;
        M += t;
        dM += -t * t * t / (j2 + t * t);  // d t / d H
      }
      return std::pair<double, double>(weight * M - 1.0, weight * dM);
    };
    const double pad = 1e-9 + 1e-12 * std::abs(j * j);
    double lo = 0.5 * j * j + vmin - pad;
    double hi = 0.5 * j * j + vmax + pad;
    double flo = mass_fdf(lo).first;
    double fhi = mass_fdf(hi).first;
    // m = 1 solves the constraint when V is constant; the band always brackets
    if (flo < 0.0 || fhi > 0.0) {
      auto bc = grow_bracket([&](double H) { return mass_fdf(H).first; }, lo, hi);
      lo = bc.lo;
      hi = bc.hi;
      flo = bc.flo;
      fhi = bc.fhi;
    }
    return newton_bisect(mass_fdf, Bracket{lo, hi, flo, fhi}, 1e-15, 1e-14);
  };

  auto residual = [&](double j) {
    solve_H(j);  // leaves warm[] holding m at the solved Hbar
    double inv = 0.0;
    for (std::size_t i = 0; i < N; ++i) inv += 1.0 / warm[i];
    return j * weight * inv - target;
  };

  // initial bracket [target - delta, target + delta], grown on sign failure
  const double delta = 2.0 * (vmax - vmin + 1.0);
  Bracket br;
  try {
    br = grow_bracket(residual, target - delta, target + delta);
  } catch (const error&) {
    fail(errc::root_find_failure,
         "current solve: drift residual has no sign change");
  }
  out.j = secant_bisect(residual, br, 1e-15, 1e-13 * std::max(1.0, std::abs(target)));
  out.H = solve_H(out.j);
  for (std::size_t i = 0; i < N; ++i)
    out.m[i] = f_inverse(out.j, out.H - vals[i], warm[i]);
  return out;
}

}  // namespace detail

struct CurrentProfile {
  double j = 0.0;
  double Hbar = 0.0;
  ScalarField m;  // > 0, unit mass
  ScalarField u;  // mean-zero
};

// Explicit solution of the 1D oscillating problem at eps = 1/k.
inline CurrentProfile solve_eps_1d(const PotentialSpec& V, double P, int k,
                                   const TorusGrid& grid) {
  require(grid.d == 1 && V.dim() == 1, errc::bad_dimension,
          "solve_eps_1d: 1D only");
  ScalarField vals = sample_potential_eps(V, grid, k);
  auto r = detail::nested_current_solve(vals.values, grid.cell_weight(), P);

  CurrentProfile out;
  out.j = r.j;
  out.Hbar = r.H;
  out.m = ScalarField(grid, std::move(r.m));
  if (P == 0.0) {
    out.u = ScalarField(grid);  // u = 0 identically at zero drift
    return out;
  }
  ScalarField du(grid);
  for (std::size_t i = 0; i < du.size(); ++i) du[i] = out.j / out.m[i] - P;
  out.u = antiderivative_mean_zero(du, 0);
  return out;
}

struct OneDLimit {
  double j = 0.0;
  double Hbar = 0.0;
  TorusGrid macro, micro;
  std::vector<double> m;   // m(x_i, y_j), macro-major
  ScalarField u0;          // on macro grid, mean-zero
  std::vector<double> u1;  // u1(x_i, y_j), mean-zero in y per x

  double m_at(std::size_t ix, std::size_t iy) const {
    return m[ix * micro.size() + iy];
  }
  ScalarField m_slice(std::size_t ix) const {
    return ScalarField(micro,
                       std::vector<double>(m.begin() + ix * micro.size(),
                                           m.begin() + (ix + 1) * micro.size()));
  }
  ScalarField u1_slice(std::size_t ix) const {
    return ScalarField(micro,
                       std::vector<double>(u1.begin() + ix * micro.size(),
                                           u1.begin() + (ix + 1) * micro.size()));
  }
};

// Two-scale limit objects of the 1D problem on a macro x micro tensor grid.
inline OneDLimit solve_limit_1d(const PotentialSpec& V, double P,
                                const TorusGrid& macro, const TorusGrid& micro) {
  require(macro.d == 1 && micro.d == 1 && V.dim() == 1, errc::bad_dimension,
          "solve_limit_1d: 1D only");
  const std::size_t nx = macro.size(), ny = micro.size();
  std::vector<double> vals(nx * ny);
  double x, y;
  for (std::size_t i = 0; i < nx; ++i) {
    x = i * macro.h;
    for (std::size_t jy = 0; jy < ny; ++jy) {
      y = jy * micro.h;
      vals[i * ny + jy] = V.eval(&x, &y);
    }
  }
  auto r = detail::nested_current_solve(vals, macro.h * micro.h, P);

  OneDLimit out;
  out.j = r.j;
  out.Hbar = r.H;
  out.macro = macro;
  out.micro = micro;
  out.m = std::move(r.m);
  out.u0 = ScalarField(macro);
  out.u1.assign(nx * ny, 0.0);
  if (P == 0.0) return out;  // u0 = 0, u1 = 0 at zero drift

  // (u0)_x = integral_y j/m dy - P, then a mean-zero antiderivative in x
  ScalarField du0(macro);
  for (std::size_t i = 0; i < nx; ++i) {
    double s = 0.0;
    for (std::size_t jy = 0; jy < ny; ++jy) s += out.j / out.m[i * ny + jy];
    du0[i] = micro.h * s - P;
  }
  out.u0 = antiderivative_mean_zero(du0, 0);

  // (u1)_y = j/m - integral_y j/m dy per macro node; mean-zero in y fixes the
  // additive freedom of the corrector
  for (std::size_t i = 0; i < nx; ++i) {
    ScalarField du1(micro);
    const double row_mean = (du0[i] + P);  // integral_y j/m dy at x_i
    for (std::size_t jy = 0; jy < ny; ++jy)
      du1[jy] = out.j / out.m[i * ny + jy] - row_mean;
    ScalarField slice = antiderivative_mean_zero(du1, 0);
    for (std::size_t jy = 0; jy < ny; ++jy) out.u1[i * ny + jy] = slice[jy];
  }
  return out;
}

struct CellCurrent {
  double j = 0.0;       // constant micro current; equals the flux b
  double Htilde = 0.0;
  ScalarField w;        // mean-zero corrector on the micro grid
  ScalarField m;        // > 0, unit mass
};

// 1D cell problem at frozen (x, Lambda): same nested root-find at the cell
// level, with w_y = j/m - Lambda.
inline CellCurrent cell_1d(const std::function<double(double)>& V_slice,
                           double Lambda, const TorusGrid& micro) {
  require(micro.d == 1, errc::bad_dimension, "cell_1d: micro grid must be 1D");
  ScalarField vals(micro);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = V_slice(i * micro.h);
  auto r = detail::nested_current_solve(vals.values, micro.h, Lambda);

  CellCurrent out;
  out.j = r.j;
  out.Htilde = r.H;
  out.m = ScalarField(micro, std::move(r.m));
  if (Lambda == 0.0) {
    out.w = ScalarField(micro);
    return out;
  }
  ScalarField dw(micro);
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = out.j / out.m[i] - Lambda;
  out.w = antiderivative_mean_zero(dw, 0);
  return out;
}

}  // namespace mfgh
