#pragma once

// eps-sweep harness: runs the oscillating solve along a sequence eps = 1/k,
// computes the limit objects once (current method in 1D, homogenized solve +
// reconstruction otherwise), and reports the convergence metrics — Hbar gap,
// sup-norm gap of u, energy gap, weak two-scale test integrals against a
// trigonometric battery, and the residuals of the first-order ansatz
// u0(x) + eps u1(x, x/eps). No rates are asserted; the report carries the
// decay sequences and monotonicity flags.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "mfgh/eps_solver.hpp"
#include "mfgh/errors.hpp"
#include "mfgh/expr.hpp"
#include "mfgh/homog_solver.hpp"
#include "mfgh/oracle1d.hpp"
#include "mfgh/potential.hpp"
#include "mfgh/torus.hpp"

namespace mfgh {

struct TestFunctionSpec {
  ExprPtr expr;
  int d = 1;
  std::string text;
};

inline TestFunctionSpec parse_test_function(const std::string& text, int d) {
  return TestFunctionSpec{parse_expr_checked(text, d), d, text};
}

// integral of w_eps(x) psi(x, x/eps) dx by grid quadrature; the grid must
// resolve x/eps exactly (n divisible by k).
inline double two_scale_test_integral(const ScalarField& w_eps,
                                      const TestFunctionSpec& psi, int k) {
  const TorusGrid& g = w_eps.grid;
  require(g.n % k == 0, errc::grid_incommensurate,
          "grid n must be a multiple of k for the x/eps sampling");
  require(g.d == psi.d, errc::dimension_error,
          "test function dimension mismatch");
  double x[3], y[3];
  double acc = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node(i, x);
    for (int a = 0; a < g.d; ++a) {
      const double ky = k * x[a];
      y[a] = ky - std::floor(ky);
    }
    const double term = w_eps[i] * eval_expr(*psi.expr, x, y);
    double t = acc + (term - comp);
    comp = (t - acc) - (term - comp);
    acc = t;
  }
  return g.cell_weight() * acc;
}

// The two-scale reference bundle the harness compares against.
struct TwoScaleFields {
  TorusGrid macro, micro;
  std::vector<double> P;
  double Hbar = 0.0;
  ScalarField u0;                  // mean-zero macro field
  ScalarField m0;                  // macro density
  std::vector<ScalarField> u1;     // per macro node, mean-zero in y
  std::vector<ScalarField> mtilde; // per macro node, unit mass in y
};

inline TwoScaleFields limit_fields_1d(const OneDLimit& lim,
                                      const std::vector<double>& P) {
  TwoScaleFields f;
  f.macro = lim.macro;
  f.micro = lim.micro;
  f.P = P;
  f.Hbar = lim.Hbar;
  f.u0 = lim.u0;
  f.m0 = ScalarField(lim.macro);
  for (std::size_t i = 0; i < lim.macro.size(); ++i) {
    auto slice = lim.m_slice(i);
    f.m0[i] = integrate(slice);
    ScalarField mt(lim.micro);
    for (std::size_t j = 0; j < lim.micro.size(); ++j)
      mt[j] = slice[j] / f.m0[i];
    f.mtilde.push_back(std::move(mt));
    f.u1.push_back(lim.u1_slice(i));
  }
  return f;
}

inline TwoScaleFields reconstruction_fields(const TwoScaleSolution& t) {
  TwoScaleFields f;
  f.macro = t.homog.macro;
  f.micro = t.micro;
  f.P = t.homog.P;
  f.Hbar = t.homog.Hbar;
  f.u0 = t.homog.u0;
  f.m0 = t.homog.m0;
  f.u1 = t.u1;
  f.mtilde.reserve(t.m.size());
  for (std::size_t k = 0; k < t.m.size(); ++k) {
    ScalarField mt(t.micro);
    for (std::size_t i = 0; i < t.micro.size(); ++i)
      mt[i] = t.m[k][i] / t.homog.m0[k];
    f.mtilde.push_back(std::move(mt));
  }
  return f;
}

namespace detail {

// Evaluates a per-macro-node family of micro fields at (x, y) for all nodes
// of an eps grid with y = fract(k x), exploiting that y takes only
// n_eps / k distinct values. 1D path; macro positions are interpolated
// spectrally, micro positions looked up or interpolated.
inline std::vector<double> compose_two_scale_1d(
    const TorusGrid& macro, const TorusGrid& micro,
    const std::vector<ScalarField>& slices, int k, const TorusGrid& eps_grid) {
  const int D = eps_grid.n / k;  // distinct y values
  const std::size_t n_eps = eps_grid.size();
  std::vector<double> out(n_eps);

  const bool micro_commensurate = micro.n % D == 0;
  std::vector<SpectralInterpolant> micro_interp;
  if (!micro_commensurate) {
    micro_interp.reserve(slices.size());
    for (const auto& s : slices) micro_interp.emplace_back(s);
  }

  std::vector<double> G(macro.size());
  for (int r = 0; r < D; ++r) {
    const double yr = static_cast<double>(r) / D;
    for (std::size_t i = 0; i < macro.size(); ++i) {
      if (micro_commensurate) {
        G[i] = slices[i][static_cast<std::size_t>(r) * (micro.n / D)];
      } else {
        G[i] = micro_interp[i](&yr);
      }
    }
    SpectralInterpolant gx(ScalarField(macro, G));
    for (std::size_t j = static_cast<std::size_t>(r); j < n_eps;
         j += static_cast<std::size_t>(D)) {
      const double xj = j * eps_grid.h;
      out[j] = gx(&xj);
    }
  }
  return out;
}

}  // namespace detail

struct ExpansionResidual {
  double hj_sup = 0.0;
  double transport_l2 = 0.0;
};

namespace detail {

// d >= 2 composition path: every eps node must be a macro node
// (eps_grid.n | macro.n); the micro coordinate fract(k x) is looked up on
// the micro grid when commensurate, otherwise interpolated per slice.
inline std::vector<double> compose_two_scale_nd(
    const TorusGrid& macro, const TorusGrid& micro,
    const std::vector<ScalarField>& slices, int k, const TorusGrid& eps_grid) {
  require(macro.n % eps_grid.n == 0, errc::grid_incommensurate,
          "macro grid must refine the eps grid for d >= 2 composition");
  const int stride = macro.n / eps_grid.n;
  const int D = eps_grid.n / k;
  const bool micro_commensurate = micro.n % D == 0;

  std::vector<std::unique_ptr<SpectralInterpolant>> interp(macro.size());
  std::vector<double> out(eps_grid.size());
  int kj[3], mj[3], yj[3];
  double y[3];
  for (std::size_t j = 0; j < eps_grid.size(); ++j) {
    eps_grid.unflatten(j, kj);
    for (int a = 0; a < eps_grid.d; ++a) mj[a] = kj[a] * stride;
    const std::size_t mi = macro.flatten(mj);
    if (micro_commensurate) {
      for (int a = 0; a < eps_grid.d; ++a)
        yj[a] = (kj[a] % D) * (micro.n / D);
      out[j] = slices[mi][micro.flatten(yj)];
    } else {
      if (!interp[mi])
        interp[mi] = std::make_unique<SpectralInterpolant>(slices[mi]);
      for (int a = 0; a < eps_grid.d; ++a)
        y[a] = static_cast<double>(kj[a] % D) / D;
      out[j] = (*interp[mi])(y);
    }
  }
  return out;
}

}  // namespace detail

// Residuals of the first-order ansatz u0 + eps u1(x, x/eps),
// m0(x) mtilde(x, x/eps) in the oscillating system with Hbar in place of
// Hbar_eps. In 1D the composition is evaluated by spectral interpolation at
// arbitrary commensurate resolutions; for d >= 2 the reference macro grid
// must refine the eps grid.
inline ExpansionResidual expansion_residual(const TwoScaleFields& f, int k,
                                            const PotentialSpec& V,
                                            const TorusGrid& eps_grid) {
  require(eps_grid.d == f.macro.d, errc::bad_dimension,
          "eps grid dimension must match the reference fields");
  require(eps_grid.n % k == 0, errc::grid_incommensurate,
          "eps grid must resolve x/eps");
  const int d = eps_grid.d;
  const double eps = 1.0 / k;

  std::vector<double> u1_comp, mt_comp;
  if (d == 1) {
    u1_comp = detail::compose_two_scale_1d(f.macro, f.micro, f.u1, k, eps_grid);
    mt_comp = detail::compose_two_scale_1d(f.macro, f.micro, f.mtilde, k, eps_grid);
  } else {
    u1_comp = detail::compose_two_scale_nd(f.macro, f.micro, f.u1, k, eps_grid);
    mt_comp = detail::compose_two_scale_nd(f.macro, f.micro, f.mtilde, k, eps_grid);
  }

  SpectralInterpolant u0i(f.u0), m0i(f.m0);
  ScalarField u_app(eps_grid), m_app(eps_grid);
  double x[3];
  for (std::size_t j = 0; j < eps_grid.size(); ++j) {
    eps_grid.node(j, x);
    u_app[j] = u0i(x) + eps * u1_comp[j];
    m_app[j] = m0i(x) * mt_comp[j];
  }

  auto vs = sample_potential_eps(V, eps_grid, k);
  auto du = gradient(u_app);
  ExpansionResidual r;
  VectorField flux(eps_grid);
  for (std::size_t j = 0; j < eps_grid.size(); ++j) {
    double q = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xi = f.P[a] + du.comp[a][j];
      q += xi * xi;
      flux.comp[a][j] = m_app[j] * xi;
    }
    const double hj = 0.5 * q + vs[j] - std::log(m_app[j]) - f.Hbar;
    r.hj_sup = std::max(r.hj_sup, std::abs(hj));
  }
  r.transport_l2 = l2_norm(divergence(flux));
  return r;
}

// Default battery: trig monomials up to degree 2 in x and y. Pure sine
// pairings vanish identically against even potentials (parity), so the
// defaults stick to combinations whose pairing with the gradient limit is
// generically nonzero.
inline std::vector<TestFunctionSpec> default_test_battery(int d) {
  std::vector<std::string> texts;
  if (d == 1) {
    texts = {"cos(2*pi*y1)",              "cos(2*pi*x1)",
             "cos(2*pi*x1)*cos(2*pi*y1)", "sin(2*pi*x1)*sin(2*pi*y1)",
             "cos(4*pi*y1)",              "cos(4*pi*x1)"};
  } else {
    texts = {"cos(2*pi*y1)",              "cos(2*pi*x1)",
             "cos(2*pi*x2)*cos(2*pi*y2)", "sin(2*pi*x1)*sin(2*pi*y1)",
             "cos(4*pi*y2)",              "cos(4*pi*x2)"};
  }
  std::vector<TestFunctionSpec> out;
  for (const auto& t : texts) out.push_back(parse_test_function(t, d));
  return out;
}

struct ConvergenceStudyConfig {
  PotentialSpec V;
  std::vector<double> P;
  std::vector<int> ks;          // eps = 1/k, strictly increasing k
  int points_per_eps = 16;      // eps grid n = points_per_eps * k
  int limit_macro_n = 128;
  int limit_micro_n = 128;
  double tol = 1e-10;
  int max_iter = 4000;
  std::vector<TestFunctionSpec> battery;  // defaulted when empty
};

struct EpsRow {
  int k = 0;
  int n = 0;
  double Hbar_eps = 0.0;
  double I_eps = 0.0;
  double gap_H = 0.0;
  double gap_u_sup = 0.0;
  double gap_energy = 0.0;
  std::vector<double> ts_gaps;  // per battery entry
  double ansatz_hj = 0.0;
  double ansatz_transport = 0.0;
  bool ansatz_available = false;  // d >= 2 needs the macro grid to refine the eps grid
  BoundReport bounds;
};

struct ConvergenceReport {
  double Hbar_ref = 0.0;
  double I_ref = 0.0;
  std::vector<int> ks;
  std::vector<EpsRow> rows;
  std::vector<std::string> battery_texts;
  // monotonicity flags, filled at assembly
  bool H_monotone = false, u_monotone = false, energy_monotone = false,
       ansatz_hj_monotone = false;
  std::vector<bool> ts_monotone;
};

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline ConvergenceReport run_convergence_study(const ConvergenceStudyConfig& cfg) {
  const int d = cfg.V.dim();
  require(!cfg.ks.empty(), errc::bad_config, "empty eps list");
  for (std::size_t i = 1; i < cfg.ks.size(); ++i)
    require(cfg.ks[i] > cfg.ks[i - 1], errc::bad_config,
            "eps list must be strictly decreasing (k increasing)");
  require(static_cast<int>(cfg.P.size()) == d, errc::bad_dimension,
          "P dimension mismatch");

  auto battery = cfg.battery.empty() ? default_test_battery(d) : cfg.battery;

  // limit objects, once
  TwoScaleFields ref;
  if (d == 1) {
    auto lim = solve_limit_1d(cfg.V, cfg.P[0], make_grid(1, cfg.limit_macro_n),
                              make_grid(1, cfg.limit_micro_n));
    ref = limit_fields_1d(lim, cfg.P);
  } else {
    auto macro = make_grid(d, cfg.limit_macro_n);
    DirectCellProvider cells(cfg.V, macro, make_grid(d, cfg.limit_micro_n));
    auto hs = solve_homog(cells, cfg.P, macro, {cfg.tol, cfg.max_iter});
    auto tss = reconstruct_two_scale(hs, cells, cfg.V);
    ref = reconstruction_fields(tss);
  }

  // limit side of the test integrals, per battery entry, summed over axes:
  // integral (d_a u0 + d_{y_a} u1) psi(x, y) dy dx
  std::vector<double> ts_ref(battery.size(), 0.0);
  {
    auto du0 = gradient(ref.u0);
    std::vector<VectorField> du1;
    du1.reserve(ref.u1.size());
    for (const auto& s : ref.u1) du1.push_back(gradient(s));
    double x[3], y[3];
    for (std::size_t bi = 0; bi < battery.size(); ++bi) {
      double total = 0.0;
      for (int a = 0; a < d; ++a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ref.macro.size(); ++i) {
          ref.macro.node(i, x);
          double inner = 0.0;
          for (std::size_t jy = 0; jy < ref.micro.size(); ++jy) {
            ref.micro.node(jy, y);
            inner += (du0.comp[a][i] + du1[i].comp[a][jy]) *
                     eval_expr(*battery[bi].expr, x, y);
          }
          acc += inner * ref.micro.cell_weight();
        }
        total += acc * ref.macro.cell_weight();
      }
      ts_ref[bi] = total;
    }
  }

  SpectralInterpolant u0i(ref.u0);
  auto vb = potential_bounds(cfg.V, d == 1 ? 65536 : 1048576L);

  ConvergenceReport rep;
  rep.Hbar_ref = ref.Hbar;
  rep.I_ref = std::exp(ref.Hbar);
  rep.ks = cfg.ks;
  for (const auto& b : battery) rep.battery_texts.push_back(b.text);

  for (int k : cfg.ks) {
    EpsRow row;
    row.k = k;
    row.n = cfg.points_per_eps * k;
    auto grid = make_grid(d, row.n);
    EpsProblem prob{cfg.V, cfg.P, k, grid};
    EpsSolution s;
    try {
      s = solve_eps(prob, {cfg.tol, cfg.max_iter});
    } catch (const error& e) {
      throw error(e.code(),
                  std::string(e.what()) + " (eps = 1/" + std::to_string(k) + ")");
    }
    row.Hbar_eps = s.Hbar;
    row.I_eps = s.I_value;
    row.gap_H = std::abs(s.Hbar - ref.Hbar);
    // |I_eps - I_ref| = I_ref |e^{dH} - 1|, evaluated via expm1 so the gap
    // stays meaningful when the Hbar difference is near the rounding floor
    row.gap_energy = rep.I_ref * std::abs(std::expm1(s.Hbar - ref.Hbar));

    double x[3];
    double ugap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.node(i, x);
      ugap = std::max(ugap, std::abs(s.u[i] - u0i(x)));
    }
    row.gap_u_sup = ugap;

    auto W = gradient(s.u);
    row.ts_gaps.assign(battery.size(), 0.0);
    for (std::size_t bi = 0; bi < battery.size(); ++bi) {
      double lhs = 0.0;
      for (int a = 0; a < d; ++a) {
        ScalarField wa(grid, W.comp[a]);
        lhs += two_scale_test_integral(wa, battery[bi], k);
      }
      row.ts_gaps[bi] = std::abs(lhs - ts_ref[bi]);
    }

    if (d == 1 || ref.macro.n % grid.n == 0) {
      auto er = expansion_residual(ref, k, cfg.V, grid);
      row.ansatz_hj = er.hj_sup;
      row.ansatz_transport = er.transport_l2;
      row.ansatz_available = true;
    }
    row.bounds = verify_bounds_eps(s, vb);
    rep.rows.push_back(std::move(row));
  }

  auto column = [&rep](auto getter) {
    std::vector<double> v;
    for (const auto& r : rep.rows) v.push_back(getter(r));
    return v;
  };
  rep.H_monotone = strictly_decreasing(column([](const EpsRow& r) { return r.gap_H; }));
  rep.u_monotone = strictly_decreasing(column([](const EpsRow& r) { return r.gap_u_sup; }));
  rep.energy_monotone =
      strictly_decreasing(column([](const EpsRow& r) { return r.gap_energy; }));
  bool ansatz_all = true;
  for (const auto& r : rep.rows) ansatz_all = ansatz_all && r.ansatz_available;
  rep.ansatz_hj_monotone =
      ansatz_all &&
      strictly_decreasing(column([](const EpsRow& r) { return r.ansatz_hj; }));
  rep.ts_monotone.resize(battery.size());
  for (std::size_t bi = 0; bi < battery.size(); ++bi) {
    std::vector<double> v;
    for (const auto& r : rep.rows) v.push_back(r.ts_gaps[bi]);
    rep.ts_monotone[bi] = strictly_decreasing(v);
  }
  return rep;
}

}  // namespace mfgh
