#pragma once

// Cell problem at frozen (x, Lambda): minimize the micro functional
// Itilde[x,Lambda; w] = integral_Y e^{|Lambda + grad_y w|^2/2 + V(x,y)} dy
// over mean-zero periodic w. Then Htilde = ln Itilde at the minimizer,
// mtilde = e^{|Lambda + grad_y w|^2/2 + V - Htilde}, and the flux
// b = integral mtilde (Lambda + grad_y w) dy equals D_Lambda Htilde.
//
// For separable potentials the cell system splits into d one-dimensional
// systems solved by the current method; the full tensor solution is the
// product/sum of the per-axis pieces. An effective-Hamiltonian table stores
// (Htilde, b) on a Lambda lattice per macro sample point, with cubic
// tensor-product interpolation for off-lattice queries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfgh/eps_solver.hpp"
#include "mfgh/errors.hpp"
#include "mfgh/minimize.hpp"
#include "mfgh/oracle1d.hpp"
#include "mfgh/potential.hpp"
#include "mfgh/torus.hpp"

namespace mfgh {

struct CellSolution {
  std::vector<double> x;       // frozen macro point
  std::vector<double> Lambda;
  TorusGrid micro;
  ScalarField w;               // mean-zero corrector
  ScalarField m;               // > 0, unit mass up to quadrature
  double Htilde = 0.0;
  std::vector<double> b;       // flux integral = D_Lambda Htilde
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = true;
};

inline CellSolution solve_cell(const PotentialSpec& V,
                               const std::vector<double>& x,
                               const std::vector<double>& Lambda,
                               const TorusGrid& micro,
                               const SolveOptions& opt = {},
                               const ScalarField* init = nullptr) {
  const int d = micro.d;
  require(V.dim() == d, errc::dimension_error,
          "potential dimension does not match the micro grid");
  require(static_cast<int>(x.size()) == d &&
              static_cast<int>(Lambda.size()) == d,
          errc::bad_dimension, "x and Lambda must have grid dimension");

  ScalarField vs = sample_potential_micro(V, x.data(), micro);
  auto spec = quadratic_exponent_spec(micro, Lambda, vs.values);

  ScalarField start = init ? *init : ScalarField(micro);
  auto r = minimize_exp_functional(spec, start, opt.tol, opt.max_iter);
  if (!r.converged && !opt.allow_unconverged)
    fail(errc::non_convergence,
         "solve_cell: " + std::to_string(r.iterations) +
             " iterations, scaled gradient norm " + format_sci(r.grad_norm));

  CellSolution s;
  s.x = x;
  s.Lambda = Lambda;
  s.micro = micro;
  s.w = std::move(r.u);
  s.Htilde = r.log_value;
  s.iterations = r.iterations;
  s.grad_norm = r.grad_norm;
  s.converged = r.converged;

  auto W = gradient(s.w);
  s.m = ScalarField(micro);
  s.b.assign(d, 0.0);
  for (std::size_t i = 0; i < micro.size(); ++i) {
    double q = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xi = Lambda[a] + W.comp[a][i];
      q += xi * xi;
    }
    s.m[i] = std::exp(0.5 * q + vs[i] - s.Htilde);
    for (int a = 0; a < d; ++a)
      s.b[a] += s.m[i] * (Lambda[a] + W.comp[a][i]);
  }
  for (int a = 0; a < d; ++a) s.b[a] *= micro.cell_weight();
  return s;
}

// Separable fast path: d independent 1D current-method solves; the tensor
// solution is mtilde = prod_i mtilde_i(y_i), w = sum_i w_i(y_i),
// Htilde = sum_i Htilde_i, b_i = j_i.
inline CellSolution solve_cell_separable(const PotentialSpec& V,
                                         const std::vector<double>& x,
                                         const std::vector<double>& Lambda,
                                         const TorusGrid& micro1d) {
  require(V.is_separable(), errc::not_separable,
          "solve_cell_separable requires a declared separable potential");
  require(micro1d.d == 1, errc::bad_dimension,
          "separable path takes a 1D micro grid per axis");
  const int d = V.dim();
  require(static_cast<int>(x.size()) == d &&
              static_cast<int>(Lambda.size()) == d,
          errc::bad_dimension, "x and Lambda must have potential dimension");

  std::vector<CellCurrent> parts;
  parts.reserve(d);
  for (int a = 0; a < d; ++a) {
    const auto& term = V.terms()[a];
    const double* xp = x.data();
    auto slice = [&term, xp, a](double y) {
      double yv[3] = {0.0, 0.0, 0.0};
      yv[a] = y;
      return eval_expr(*term, xp, yv);
    };
    parts.push_back(cell_1d(slice, Lambda[a], micro1d));
  }

  CellSolution s;
  s.x = x;
  s.Lambda = Lambda;
  s.micro = d == 1 ? micro1d : make_grid(d, micro1d.n);
  s.w = ScalarField(s.micro);
  s.m = ScalarField(s.micro);
  s.Htilde = 0.0;
  s.b.assign(d, 0.0);
  for (int a = 0; a < d; ++a) {
    s.Htilde += parts[a].Htilde;
    s.b[a] = parts[a].j;
  }
  int idx[3];
  for (std::size_t i = 0; i < s.micro.size(); ++i) {
    s.micro.unflatten(i, idx);
    double wsum = 0.0, mprod = 1.0;
    for (int a = 0; a < d; ++a) {
      wsum += parts[a].w[idx[a]];
      mprod *= parts[a].m[idx[a]];
    }
    s.w[i] = wsum;
    s.m[i] = mprod;
  }
  return s;
}

// Informational regularity proxy: largest Fourier magnitude of the corrector
// beyond half the resolved band. Smooth correctors decay far below the head.
inline double corrector_spectral_tail(const ScalarField& w) {
  auto coeff = detail::spectrum(w);
  const TorusGrid& g = w.grid;
  double head = 0.0, tail = 0.0;
  int k[3];
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    g.unflatten(i, k);
    int kmax = 0;
    for (int a = 0; a < g.d; ++a)
      kmax = std::max(kmax, std::abs(detail::wavenumber(k[a], g.n)));
    const double mag = std::abs(coeff[i]);
    if (kmax > g.n / 4)
      tail = std::max(tail, mag);
    else
      head = std::max(head, mag);
  }
  return head > 0.0 ? tail / head : 0.0;
}

struct FluxCheck {
  std::vector<double> fd;  // central differences of Htilde per Lambda axis
  std::vector<double> b;   // flux from solve_cell
  double max_rel_mismatch = 0.0;
};

// Central finite difference of Htilde in each Lambda axis against the flux
// integral; both sides come from independent solves.
inline FluxCheck flux_vs_fd(const PotentialSpec& V, const std::vector<double>& x,
                            const std::vector<double>& Lambda,
                            const TorusGrid& micro, double step,
                            const SolveOptions& opt = {}) {
  require(step >= 1e-4 && step <= 1e-2, errc::bad_config,
          "fd step must lie in [1e-4, 1e-2]");
  auto center = solve_cell(V, x, Lambda, micro, opt);
  FluxCheck out;
  out.b = center.b;
  out.fd.assign(micro.d, 0.0);
  for (int a = 0; a < micro.d; ++a) {
    auto Lp = Lambda, Lm = Lambda;
    Lp[a] += step;
    Lm[a] -= step;
    const double Hp = solve_cell(V, x, Lp, micro, opt).Htilde;
    const double Hm = solve_cell(V, x, Lm, micro, opt).Htilde;
    out.fd[a] = (Hp - Hm) / (2.0 * step);
    const double rel =
        std::abs(out.fd[a] - out.b[a]) / std::max(1.0, std::abs(out.b[a]));
    out.max_rel_mismatch = std::max(out.max_rel_mismatch, rel);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Effective-Hamiltonian table

struct EffectiveHamiltonianTable {
  int d = 1;
  TorusGrid macro;        // macro sample points (uniform torus grid)
  TorusGrid micro;        // micro grid used for the cell solves
  double lambda_max = 0.0;
  double dlambda = 0.0;
  int nl = 0;             // lattice points per Lambda axis
  std::vector<double> H;  // [macro.size() * nl^d]
  std::vector<double> b;  // [macro.size() * nl^d * d]

  std::size_t lambda_count() const {
    std::size_t c = 1;
    for (int a = 0; a < d; ++a) c *= static_cast<std::size_t>(nl);
    return c;
  }
  double lambda_node(int j) const { return -lambda_max + j * dlambda; }
  std::size_t lambda_flatten(const int* lj) const {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
      idx = idx * static_cast<std::size_t>(nl) + static_cast<std::size_t>(lj[a]);
    return idx;
  }
  double& H_at(std::size_t xi, std::size_t li) {
    return H[xi * lambda_count() + li];
  }
  double H_at(std::size_t xi, std::size_t li) const {
    return H[xi * lambda_count() + li];
  }
  double& b_at(std::size_t xi, std::size_t li, int a) {
    return b[(xi * lambda_count() + li) * d + a];
  }
  double b_at(std::size_t xi, std::size_t li, int a) const {
    return b[(xi * lambda_count() + li) * d + a];
  }
};

// Builds the (Htilde, b) lattice. Cells are independent; the separable fast
// path is used when the potential declares it (and for d = 1, where the
// current method is exact), otherwise each lattice point is a variational
// solve.
inline EffectiveHamiltonianTable tabulate_Heff(const PotentialSpec& V,
                                               const TorusGrid& macro,
                                               double lambda_max, double dlambda,
                                               const TorusGrid& micro,
                                               const SolveOptions& opt = {},
                                               bool prefer_current_method = true) {
  const int d = V.dim();
  require(macro.d == d, errc::dimension_error, "macro grid dimension mismatch");
  require(lambda_max > 0.0 && dlambda > 0.0, errc::bad_config,
          "lambda box must have positive extent and step");

  EffectiveHamiltonianTable t;
  t.d = d;
  t.macro = macro;
  t.micro = micro;
  t.lambda_max = lambda_max;
  t.dlambda = dlambda;
  t.nl = 2 * static_cast<int>(std::round(lambda_max / dlambda)) + 1;
  require(t.nl >= 2, errc::bad_config, "lambda lattice too coarse");
  t.H.assign(macro.size() * t.lambda_count(), 0.0);
  t.b.assign(macro.size() * t.lambda_count() * d, 0.0);

  const bool fast = prefer_current_method && (d == 1 || V.is_separable());
  const TorusGrid micro1d = (micro.d == 1) ? micro : make_grid(1, micro.n);

  std::vector<double> x(d), L(d);
  int lj[3] = {0, 0, 0};
  for (std::size_t xi = 0; xi < macro.size(); ++xi) {
    macro.node(xi, x.data());
    for (std::size_t li = 0; li < t.lambda_count(); ++li) {
      std::size_t rem = li;
      for (int a = d - 1; a >= 0; --a) {
        lj[a] = static_cast<int>(rem % t.nl);
        rem /= t.nl;
      }
      for (int a = 0; a < d; ++a) L[a] = t.lambda_node(lj[a]);
      try {
        if (fast && d == 1) {
          const double* xp = x.data();
          auto slice = [&V, xp](double y) { return V.eval(xp, &y); };
          auto c = cell_1d(slice, L[0], micro1d);
          t.H_at(xi, li) = c.Htilde;
          t.b_at(xi, li, 0) = c.j;
        } else if (fast) {
          auto c = solve_cell_separable(V, x, L, micro1d);
          t.H_at(xi, li) = c.Htilde;
          for (int a = 0; a < d; ++a) t.b_at(xi, li, a) = c.b[a];
        } else {
          auto c = solve_cell(V, x, L, micro, opt);
          t.H_at(xi, li) = c.Htilde;
          for (int a = 0; a < d; ++a) t.b_at(xi, li, a) = c.b[a];
        }
      } catch (const error& e) {
        std::string loc = " at x index " + std::to_string(xi) + ", Lambda = (";
        for (int a = 0; a < d; ++a)
          loc += std::to_string(L[a]) + (a + 1 < d ? ", " : ")");
        throw error(e.code(), e.what() + loc);
      }
    }
  }
  return t;
}

namespace detail {

// Cubic Lagrange weights on a unit-spaced 4-point stencil {s, s+1, s+2, s+3}
// at coordinate t (absolute, same units).
inline std::array<double, 4> cubic_weights(double t, int s) {
  std::array<double, 4> w;
  for (int i = 0; i < 4; ++i) {
    double num = 1.0, den = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      num *= t - (s + j);
      den *= static_cast<double>(i - j);
    }
    w[i] = num / den;
  }
  return w;
}

}  // namespace detail

// Cubic tensor-product interpolation of Htilde and b. Periodic in x, clamped
// 4-point stencils in Lambda; queries outside the Lambda box throw
// OutOfTableRange. Cubic reproduces the dominant quadratic |Lambda|^2/2
// exactly.
inline std::pair<double, std::vector<double>> eval_Heff(
    const EffectiveHamiltonianTable& t, const double* x, const double* Lambda) {
  const int d = t.d;
  // per-axis stencils: first d axes are x (periodic), next d are Lambda
  std::array<std::array<double, 4>, 6> w{};
  std::array<std::array<int, 4>, 6> idx{};

  for (int a = 0; a < d; ++a) {
    double xr = x[a] - std::floor(x[a]);
    double tt = xr / t.macro.h;
    int i0 = static_cast<int>(std::floor(tt));
    auto wa = detail::cubic_weights(tt, i0 - 1);
    for (int i = 0; i < 4; ++i) {
      int ii = (i0 - 1 + i) % t.macro.n;
      if (ii < 0) ii += t.macro.n;
      idx[a][i] = ii;
      w[a][i] = wa[i];
    }
  }
  const double tol = 1e-12 * std::max(1.0, t.lambda_max);
  for (int a = 0; a < d; ++a) {
    const double L = Lambda[a];
    if (L < -t.lambda_max - tol || L > t.lambda_max + tol)
      fail(errc::out_of_table_range,
           "Lambda[" + std::to_string(a) + "] = " + std::to_string(L) +
               " outside the table box [-" + std::to_string(t.lambda_max) +
               ", " + std::to_string(t.lambda_max) + "]");
    double tt = (std::clamp(L, -t.lambda_max, t.lambda_max) + t.lambda_max) /
                t.dlambda;
    int i0 = static_cast<int>(std::floor(tt));
    int s = std::clamp(i0 - 1, 0, t.nl - 4);
    auto wa = detail::cubic_weights(tt, s);
    for (int i = 0; i < 4; ++i) {
      idx[d + a][i] = s + i;
      w[d + a][i] = wa[i];
    }
  }

  double Hv = 0.0;
  std::vector<double> bv(d, 0.0);
  const int axes = 2 * d;
  std::array<int, 6> c{};
  while (true) {
    double weight = 1.0;
    for (int a = 0; a < axes; ++a) weight *= w[a][c[a]];
    int xk[3], lk[3];
    for (int a = 0; a < d; ++a) xk[a] = idx[a][c[a]];
    for (int a = 0; a < d; ++a) lk[a] = idx[d + a][c[d + a]];
    const std::size_t xi = t.macro.flatten(xk);
    const std::size_t li = t.lambda_flatten(lk);
    Hv += weight * t.H_at(xi, li);
    for (int a = 0; a < d; ++a) bv[a] += weight * t.b_at(xi, li, a);
    int a = axes - 1;
    while (a >= 0 && ++c[a] == 4) c[a--] = 0;
    if (a < 0) break;
  }
  return {Hv, std::move(bv)};
}

struct HeffPropertyReport {
  double max_dH_dx = 0.0;          // FD in x over the macro grid
  double max_dH_dLambda_rel = 0.0; // max |dH/dL| / (1 + |Lambda|)
  double min_hessian_eig = 0.0;    // min eigenvalue of the FD Lambda-Hessian
  double max_hessian_abs = 0.0;
  bool coercivity_pass = true;     // |L|^2/2 + inf V <= H <= |L|^2/2 + sup V
  double coercivity_worst = 0.0;   // most negative band margin observed
};

namespace detail {

inline double sym_eig_min(const std::vector<double>& A, int d) {
  if (d == 1) return A[0];
  if (d == 2) {
    const double tr = A[0] + A[3];
    const double det = A[0] * A[3] - A[1] * A[2];
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return 0.5 * tr - disc;
  }
  // d == 3: smallest root of the characteristic polynomial (trig method)
  const double q = (A[0] + A[4] + A[8]) / 3.0;
  double p2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double v = A[i * 3 + j] - (i == j ? q : 0.0);
      p2 += v * v;
    }
  const double p = std::sqrt(p2 / 6.0);
  if (p < 1e-300) return q;
  double det = 0.0;
  {
    auto B = [&](int i, int j) { return (A[i * 3 + j] - (i == j ? q : 0.0)) / p; };
    det = B(0, 0) * (B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1)) -
          B(0, 1) * (B(1, 0) * B(2, 2) - B(1, 2) * B(2, 0)) +
          B(0, 2) * (B(1, 0) * B(2, 1) - B(1, 1) * B(2, 0));
  }
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

}  // namespace detail

// Finite-difference derivative surrogates over the lattice: bounds on
// |dH/dx|, |dH/dLambda|/(1+|Lambda|), the Lambda-Hessian spectrum, and the
// coercivity band. Requires >= 5 lattice points per Lambda axis.
inline HeffPropertyReport verify_Heff_properties(
    const EffectiveHamiltonianTable& t, const PotentialBounds& vb,
    double slack = 1e-2) {
  const int d = t.d;
  require(t.nl >= 5, errc::bad_config,
          "property report needs at least 5 lattice points per axis");
  HeffPropertyReport rep;
  rep.min_hessian_eig = std::numeric_limits<double>::infinity();
  rep.coercivity_worst = std::numeric_limits<double>::infinity();

  const std::size_t LC = t.lambda_count();
  int lj[3];
  std::vector<double> L(d), hess(static_cast<std::size_t>(d) * d);
  for (std::size_t xi = 0; xi < t.macro.size(); ++xi) {
    int xk[3];
    t.macro.unflatten(xi, xk);
    for (std::size_t li = 0; li < LC; ++li) {
      std::size_t rem = li;
      for (int a = d - 1; a >= 0; --a) {
        lj[a] = static_cast<int>(rem % t.nl);
        rem /= t.nl;
      }
      double L2 = 0.0;
      for (int a = 0; a < d; ++a) {
        L[a] = t.lambda_node(lj[a]);
        L2 += L[a] * L[a];
      }
      const double Hc = t.H_at(xi, li);

      // coercivity band margin: inside [inf V - slack, sup V + slack]
      const double excess = Hc - 0.5 * L2;
      const double margin =
          std::min(excess - (vb.vmin - slack), (vb.vmax + slack) - excess);
      rep.coercivity_worst = std::min(rep.coercivity_worst, margin);
      if (margin < 0.0) rep.coercivity_pass = false;

      // x-derivatives: central differences on the periodic macro grid
      for (int a = 0; a < d; ++a) {
        int kp[3], km[3];
        for (int q = 0; q < d; ++q) kp[q] = km[q] = xk[q];
        kp[a] = (xk[a] + 1) % t.macro.n;
        km[a] = (xk[a] - 1 + t.macro.n) % t.macro.n;
        const double dHdx = (t.H_at(t.macro.flatten(kp), li) -
                             t.H_at(t.macro.flatten(km), li)) /
                            (2.0 * t.macro.h);
        rep.max_dH_dx = std::max(rep.max_dH_dx, std::abs(dHdx));
      }

      // Lambda-derivatives and Hessian at interior lattice points
      bool interior = true;
      for (int a = 0; a < d; ++a)
        if (lj[a] == 0 || lj[a] == t.nl - 1) interior = false;
      if (!interior) continue;

      auto H_off = [&](int a, int da, int bax, int db) {
        int off[3];
        for (int q = 0; q < d; ++q) off[q] = lj[q];
        off[a] += da;
        if (bax >= 0) off[bax] += db;
        return t.H_at(xi, t.lambda_flatten(off));
      };
      const double Lnorm = std::sqrt(L2);
      for (int a = 0; a < d; ++a) {
        const double dHdL =
            (H_off(a, 1, -1, 0) - H_off(a, -1, -1, 0)) / (2.0 * t.dlambda);
        rep.max_dH_dLambda_rel =
            std::max(rep.max_dH_dLambda_rel, std::abs(dHdL) / (1.0 + Lnorm));
        hess[a * d + a] =
            (H_off(a, 1, -1, 0) - 2.0 * Hc + H_off(a, -1, -1, 0)) /
            (t.dlambda * t.dlambda);
        for (int bax = a + 1; bax < d; ++bax) {
          const double hab = (H_off(a, 1, bax, 1) - H_off(a, 1, bax, -1) -
                              H_off(a, -1, bax, 1) + H_off(a, -1, bax, -1)) /
                             (4.0 * t.dlambda * t.dlambda);
          hess[a * d + bax] = hab;
          hess[bax * d + a] = hab;
        }
      }
      for (double v : hess)
        rep.max_hessian_abs = std::max(rep.max_hessian_abs, std::abs(v));
      rep.min_hessian_eig =
          std::min(rep.min_hessian_eig, detail::sym_eig_min(hess, d));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Cell providers: the homogenized solver's access to (Htilde, D_Lambda Htilde)

struct CellEval {
  double H = 0.0;
  std::array<double, 3> b{};
};

class CellProvider {
 public:
  virtual ~CellProvider() = default;
  virtual const TorusGrid& macro_grid() const = 0;
  virtual CellEval eval(std::size_t macro_idx, const double* Lambda) const = 0;
  // Full micro solution for reconstruction; not all providers support it.
  virtual CellSolution solve_full(std::size_t macro_idx,
                                  const double* Lambda) const = 0;
};

// On-the-fly cell solves with memoization. Lookups are bucketed by Lambda
// quantized at 1e-6, but a hit also requires bitwise-equal Lambda so the
// cached (H, b) pair never mixes with a neighboring query — interpolating
// within a bucket would cap the homogenized solve's attainable tolerance.
class DirectCellProvider : public CellProvider {
 public:
  DirectCellProvider(PotentialSpec V, TorusGrid macro, TorusGrid micro,
                     SolveOptions opt = {}, bool prefer_current_method = true)
      : V_(std::move(V)),
        macro_(macro),
        micro_(micro),
        micro1d_(micro.d == 1 ? micro : make_grid(1, micro.n)),
        opt_(opt),
        fast_(prefer_current_method && (V_.dim() == 1 || V_.is_separable())) {}

  const TorusGrid& macro_grid() const override { return macro_; }
  const TorusGrid& micro_grid() const { return micro_; }
  bool uses_current_method() const { return fast_; }

  CellEval eval(std::size_t macro_idx, const double* Lambda) const override {
    const int d = V_.dim();
    Key key{macro_idx, {}};
    for (int a = 0; a < d; ++a)
      key.ql[a] = static_cast<std::int64_t>(std::llround(Lambda[a] * 1e6));
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) {
        bool exact = true;
        for (int a = 0; a < d; ++a)
          if (it->second.Lambda[a] != Lambda[a]) exact = false;
        if (exact) return it->second.val;
      }
    }
    CellEval ev = compute(macro_idx, Lambda);
    {
      std::lock_guard<std::mutex> lock(mu_);
      Entry e;
      for (int a = 0; a < d; ++a) e.Lambda[a] = Lambda[a];
      e.val = ev;
      memo_[key] = e;
    }
    return ev;
  }

  CellSolution solve_full(std::size_t macro_idx,
                          const double* Lambda) const override {
    const int d = V_.dim();
    std::vector<double> x(d), L(Lambda, Lambda + d);
    macro_.node(macro_idx, x.data());
    if (fast_ && d == 1) {
      const double* xp = x.data();
      auto slice = [this, xp](double y) { return V_.eval(xp, &y); };
      auto c = cell_1d(slice, L[0], micro1d_);
      CellSolution s;
      s.x = x;
      s.Lambda = L;
      s.micro = micro1d_;
      s.w = std::move(c.w);
      s.m = std::move(c.m);
      s.Htilde = c.Htilde;
      s.b = {c.j};
      return s;
    }
    if (fast_) return solve_cell_separable(V_, x, L, micro1d_);
    return solve_cell(V_, x, L, micro_, opt_);
  }

 private:
  struct Key {
    std::size_t idx;
    std::array<std::int64_t, 3> ql;
    bool operator==(const Key& o) const { return idx == o.idx && ql == o.ql; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<std::size_t>()(k.idx);
      for (auto q : k.ql)
        h ^= std::hash<std::int64_t>()(q) + 0x9e3779b97f4a7c15ull + (h << 6) +
             (h >> 2);
      return h;
    }
  };
  struct Entry {
    std::array<double, 3> Lambda{};
    CellEval val;
  };

  CellEval compute(std::size_t macro_idx, const double* Lambda) const {
    const int d = V_.dim();
    std::vector<double> x(d), L(Lambda, Lambda + d);
    macro_.node(macro_idx, x.data());
    CellEval ev;
    if (fast_ && d == 1) {
      const double* xp = x.data();
      auto slice = [this, xp](double y) { return V_.eval(xp, &y); };
      auto c = cell_1d(slice, L[0], micro1d_);
      ev.H = c.Htilde;
      ev.b[0] = c.j;
      return ev;
    }
    if (fast_) {
      for (int a = 0; a < d; ++a) {
        const auto& term = V_.terms()[a];
        const double* xp = x.data();
        auto slice = [&term, xp, a](double y) {
          double yv[3] = {0.0, 0.0, 0.0};
          yv[a] = y;
          return eval_expr(*term, xp, yv);
        };
        auto c = cell_1d(slice, L[a], micro1d_);
        ev.H += c.Htilde;
        ev.b[a] = c.j;
      }
      return ev;
    }
    auto c = solve_cell(V_, x, L, micro_, opt_);
    ev.H = c.Htilde;
    for (int a = 0; a < d; ++a) ev.b[a] = c.b[a];
    return ev;
  }

  PotentialSpec V_;
  TorusGrid macro_, micro_, micro1d_;
  SolveOptions opt_;
  bool fast_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Key, Entry, KeyHash> memo_;
};

// Interpolated table access; fast but limited to (H, b) queries. Micro-field
// reconstruction needs a direct provider.
class TableCellProvider : public CellProvider {
 public:
  TableCellProvider(const EffectiveHamiltonianTable& t, TorusGrid macro)
      : table_(t), macro_(macro) {}

  const TorusGrid& macro_grid() const override { return macro_; }

  CellEval eval(std::size_t macro_idx, const double* Lambda) const override {
    double x[3];
    macro_.node(macro_idx, x);
    auto [H, b] = eval_Heff(table_, x, Lambda);
    CellEval ev;
    ev.H = H;
    for (int a = 0; a < table_.d; ++a) ev.b[a] = b[a];
    return ev;
  }

  CellSolution solve_full(std::size_t, const double*) const override {
    fail(errc::bad_config,
         "table provider cannot reconstruct micro fields; use a direct provider");
  }

 private:
  const EffectiveHamiltonianTable& table_;
  TorusGrid macro_;
};

}  // namespace mfgh
