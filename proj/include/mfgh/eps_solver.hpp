#pragma once

// Solves the oscillating problem at eps = 1/k in d dimensions by convex
// minimization of I[u] = integral e^{|P + grad u|^2/2 + V(x, x/eps)} dx over
// mean-zero u, then recovers Hbar = ln I[u*] and the density
// m = e^{|P + grad u*|^2/2 + V - Hbar}, which has unit mass by construction
// up to quadrature error. The a priori bounds (Hbar band, gradient energy,
// entropy, pointwise density floor) are certified per solve.

#include <cmath>
#include <string>
#include <vector>

#include "mfgh/errors.hpp"
#include "mfgh/minimize.hpp"
#include "mfgh/potential.hpp"
#include "mfgh/torus.hpp"

namespace mfgh {

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 2000;
  bool allow_unconverged = false;  // truncated runs return instead of throwing
};

struct EpsProblem {
  PotentialSpec potential;
  std::vector<double> P;
  int k = 1;  // eps = 1/k
  TorusGrid grid;
};

struct EpsSolution {
  EpsProblem problem;
  ScalarField u;  // mean-zero
  ScalarField m;  // > 0, unit mass up to quadrature
  double Hbar = 0.0;
  double I_value = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

inline void validate_eps_problem(const EpsProblem& p) {
  require(p.k >= 1, errc::bad_config, "eps must be 1/k with integer k >= 1");
  require(static_cast<int>(p.P.size()) == p.grid.d, errc::bad_dimension,
          "drift P dimension does not match the grid");
  require(p.potential.dim() == p.grid.d, errc::dimension_error,
          "potential dimension does not match the grid");
  require(p.grid.n % p.k == 0, errc::grid_incommensurate,
          "grid n = " + std::to_string(p.grid.n) +
              " must be a multiple of k = " + std::to_string(p.k));
}

inline EpsSolution solve_eps(const EpsProblem& p, const SolveOptions& opt = {},
                             const ScalarField* init = nullptr) {
  validate_eps_problem(p);
  ScalarField vs = sample_potential_eps(p.potential, p.grid, p.k);
  auto spec = quadratic_exponent_spec(p.grid, p.P, vs.values);

  ScalarField start = init ? *init : ScalarField(p.grid);
  auto r = minimize_exp_functional(spec, start, opt.tol, opt.max_iter);
  if (!r.converged && !opt.allow_unconverged)
    fail(errc::non_convergence,
         "solve_eps: " + std::to_string(r.iterations) +
             " iterations, scaled gradient norm " +
             format_sci(r.grad_norm));

  EpsSolution s;
  s.problem = p;
  s.u = std::move(r.u);
  s.Hbar = r.log_value;
  s.I_value = r.value;
  s.iterations = r.iterations;
  s.grad_norm = r.grad_norm;
  s.converged = r.converged;

  auto W = gradient(s.u);
  s.m = ScalarField(p.grid);
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    double q = 0.0;
    for (int a = 0; a < p.grid.d; ++a) {
      const double xi = p.P[a] + W.comp[a][i];
      q += xi * xi;
    }
    s.m[i] = std::exp(0.5 * q + vs[i] - s.Hbar);
  }
  return s;
}

struct ResidualReport {
  double hj = 0.0;         // identically zero: m is defined through the HJ relation
  double transport = 0.0;  // L2 norm of div(m (P + grad u))
};

inline ResidualReport residuals_eps(const EpsSolution& s) {
  const TorusGrid& g = s.problem.grid;
  auto W = gradient(s.u);
  VectorField flux(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int a = 0; a < g.d; ++a)
      flux.comp[a][i] = s.m[i] * (s.problem.P[a] + W.comp[a][i]);
  ResidualReport r;
  r.transport = l2_norm(divergence(flux));
  return r;
}

struct BoundCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool is_upper = true;  // measured <= bound (or >= for lower bounds)
  bool pass = false;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// A priori bounds with a 1e-2 slack absorbing the sampled inf/sup error:
//   (a) inf V <= Hbar <= |P|^2/2 + sup V
//   (b) integral |grad u|^2 <= 2 (sup V - inf V)
//   (c) integral m ln m <= |P|^2/2 + sup V - inf V
//   (d) m >= exp(inf V - sup V - |P|^2/2) pointwise
inline BoundReport verify_bounds_eps(const EpsSolution& s,
                                     const PotentialBounds& b,
                                     double slack = 1e-2) {
  const TorusGrid& g = s.problem.grid;
  double p2 = 0.0;
  for (double v : s.problem.P) p2 += v * v;

  BoundReport rep;
  auto push_upper = [&rep](const std::string& name, double measured,
                           double bound) {
    rep.checks.push_back({name, measured, bound, true, measured <= bound});
  };
  auto push_lower = [&rep](const std::string& name, double measured,
                           double bound) {
    rep.checks.push_back({name, measured, bound, false, measured >= bound});
  };

  push_lower("Hbar_lower", s.Hbar, b.vmin - slack);
  push_upper("Hbar_upper", s.Hbar, 0.5 * p2 + b.vmax + slack);

  auto W = gradient(s.u);
  ScalarField g2(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double q = 0.0;
    for (int a = 0; a < g.d; ++a) q += W.comp[a][i] * W.comp[a][i];
    g2[i] = q;
  }
  push_upper("gradient_energy", integrate(g2), 2.0 * (b.vmax - b.vmin) + slack);

  ScalarField mlnm(g);
  for (std::size_t i = 0; i < g.size(); ++i) mlnm[i] = s.m[i] * std::log(s.m[i]);
  push_upper("entropy", integrate(mlnm), 0.5 * p2 + (b.vmax - b.vmin) + slack);

  double mmin = s.m[0];
  for (double v : s.m.values) mmin = std::min(mmin, v);
  push_lower("m_floor", mmin, std::exp(b.vmin - b.vmax - 0.5 * p2 - slack));

  return rep;
}

}  // namespace mfgh
