#pragma once

// The smooth Y^d-periodic potential V(x, y): either a single parsed
// expression over x1..xd, y1..yd, or a declared separable sum of d per-axis
// terms (term i over x1..xd and y_i only). Separability is declared, never
// auto-detected. Bounds are estimated by dense lattice sampling followed by
// local coordinate refinement; callers add a 1e-2 slack wherever sampled
// inf/sup enter an invariant check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mfgh/errors.hpp"
#include "mfgh/expr.hpp"
#include "mfgh/torus.hpp"

namespace mfgh {

struct PotentialBounds {
  double vmin = 0.0;
  double vmax = 0.0;
  long samples = 0;
};

class PotentialSpec {
 public:
  enum class Kind { expression, separable };

  PotentialSpec() = default;

  static PotentialSpec expression(ExprPtr e, int d) {
    PotentialSpec s;
    s.kind_ = Kind::expression;
    s.d_ = d;
    s.terms_.push_back(std::move(e));
    return s;
  }

  // term i may use any x-variable but only y_i.
  static PotentialSpec separable(std::vector<ExprPtr> terms, int d) {
    require(static_cast<int>(terms.size()) == d, errc::dimension_error,
            "separable potential needs exactly d terms");
    for (int i = 0; i < d; ++i) {
      for (int j = 1; j <= d; ++j) {
        if (j == i + 1) continue;
        require(!expr_uses_var(*terms[i], 'y', j), errc::dimension_error,
                "separable term " + std::to_string(i + 1) +
                    " must not use y" + std::to_string(j));
      }
    }
    PotentialSpec s;
    s.kind_ = Kind::separable;
    s.d_ = d;
    s.terms_ = std::move(terms);
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return d_; }
  bool is_separable() const { return kind_ == Kind::separable; }
  const std::vector<ExprPtr>& terms() const { return terms_; }

  double eval(const double* x, const double* y) const {
    double v = 0.0;
    for (const auto& t : terms_) v += eval_expr(*t, x, y);
    return v;
  }

  bool depends_on_x() const {
    for (const auto& t : terms_)
      if (expr_uses_var(*t, 'x', 0)) return true;
    return false;
  }

  std::vector<std::string> printed_terms() const {
    std::vector<std::string> out;
    for (const auto& t : terms_) out.push_back(print_expr(*t));
    return out;
  }

 private:
  Kind kind_ = Kind::expression;
  int d_ = 1;
  std::vector<ExprPtr> terms_;
};

inline PotentialSpec parse_potential(const std::string& text, int d) {
  return PotentialSpec::expression(parse_expr_checked(text, d), d);
}

inline PotentialSpec parse_separable_potential(
    const std::vector<std::string>& texts, int d) {
  std::vector<ExprPtr> terms;
  for (const auto& t : texts) terms.push_back(parse_expr_checked(t, d));
  return PotentialSpec::separable(std::move(terms), d);
}

inline double eval_potential(const PotentialSpec& spec, const double* x,
                             const double* y) {
  return spec.eval(x, y);
}

namespace detail {

// Cyclic coordinate ternary search around a start point, confined to
// +-radius per coordinate; refines a lattice optimum on smooth data.
template <class F>
inline double refine_extremum(F f, std::vector<double>& pt, double radius,
                              bool maximize, int sweeps = 4) {
  const double sign = maximize ? 1.0 : -1.0;
  double best = sign * f(pt.data());
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t a = 0; a < pt.size(); ++a) {
      double lo = pt[a] - radius, hi = pt[a] + radius;
      for (int it = 0; it < 60; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        double save = pt[a];
        pt[a] = m1;
        double f1 = sign * f(pt.data());
        pt[a] = m2;
        double f2 = sign * f(pt.data());
        pt[a] = save;
        if (f1 < f2)
          lo = m1;
        else
          hi = m2;
      }
      double cand = 0.5 * (lo + hi);
      double save = pt[a];
      pt[a] = cand;
      double fc = sign * f(pt.data());
      if (fc >= best) {
        best = fc;
      } else {
        pt[a] = save;
      }
    }
  }
  return sign * best;
}

}  // namespace detail

// Min/max of V over a dense uniform (x, y) lattice with local refinement.
// `samples` is the total lattice budget (>= 64^d); the result brackets the
// true inf/sup from inside, so invariant checks add a small slack.
inline PotentialBounds potential_bounds(const PotentialSpec& spec,
                                        long samples) {
  const int d = spec.dim();
  long min_samples = 1;
  for (int i = 0; i < d; ++i) min_samples *= 64;
  require(samples >= min_samples, errc::bad_config,
          "potential_bounds: samples must be >= 64^d");

  const int axes = 2 * d;  // x1..xd, y1..yd
  int m = static_cast<int>(std::floor(std::pow(static_cast<double>(samples),
                                               1.0 / axes)));
  m = std::clamp(m, 8, d == 1 ? 256 : (d == 2 ? 32 : 12));

  auto eval_at = [&spec, d](const double* p) {
    return spec.eval(p, p + d);
  };

  std::vector<double> pt(axes, 0.0), argmin(axes, 0.0), argmax(axes, 0.0);
  double vmin = 0.0, vmax = 0.0;
  bool first = true;
  long count = 0;

  std::vector<int> idx(axes, 0);
  const double step = 1.0 / m;
  while (true) {
    for (int a = 0; a < axes; ++a) pt[a] = idx[a] * step;
    double v = eval_at(pt.data());
    ++count;
    if (first || v < vmin) {
      vmin = v;
      argmin = pt;
    }
    if (first || v > vmax) {
      vmax = v;
      argmax = pt;
    }
    first = false;
    int a = axes - 1;
    while (a >= 0 && ++idx[a] == m) idx[a--] = 0;
    if (a < 0) break;
  }

  vmin = detail::refine_extremum(eval_at, argmin, step, /*maximize=*/false);
  vmax = detail::refine_extremum(eval_at, argmax, step, /*maximize=*/true);
  return PotentialBounds{vmin, vmax, count};
}

// Samples V(x, x/eps) with eps = 1/k on an eps-resolving grid. The grid must
// have n divisible by k so the composed field is exactly grid-periodic.
inline ScalarField sample_potential_eps(const PotentialSpec& spec,
                                        const TorusGrid& grid, int k) {
  require(k >= 1, errc::bad_config, "eps must be 1/k with k >= 1");
  require(grid.n % k == 0, errc::grid_incommensurate,
          "grid n = " + std::to_string(grid.n) +
              " is not a multiple of k = " + std::to_string(k));
  require(grid.d == spec.dim(), errc::dimension_error,
          "grid dimension does not match potential dimension");
  ScalarField out(grid);
  double x[3], y[3];
  for (std::size_t i = 0; i < out.size(); ++i) {
    grid.node(i, x);
    for (int a = 0; a < grid.d; ++a) {
      double ky = k * x[a];
      y[a] = ky - std::floor(ky);
    }
    out[i] = spec.eval(x, y);
  }
  return out;
}

// Samples y -> V(x, y) on the micro grid at a frozen macro point x.
inline ScalarField sample_potential_micro(const PotentialSpec& spec,
                                          const double* x,
                                          const TorusGrid& micro) {
  require(micro.d == spec.dim(), errc::dimension_error,
          "micro grid dimension does not match potential dimension");
  ScalarField out(micro);
  double y[3];
  for (std::size_t i = 0; i < out.size(); ++i) {
    micro.node(i, y);
    out[i] = spec.eval(x, y);
  }
  return out;
}

// Samples y -> V_i(x, y) for one separable term on a 1D micro grid.
inline ScalarField sample_separable_term(const PotentialSpec& spec, int axis,
                                         const double* x,
                                         const TorusGrid& micro1d) {
  require(spec.is_separable(), errc::not_separable,
          "per-axis sampling requires a separable potential");
  require(micro1d.d == 1, errc::bad_dimension, "micro grid must be 1D");
  ScalarField out(micro1d);
  double y[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < out.size(); ++i) {
    y[axis] = i * micro1d.h;
    out[i] = eval_expr(*spec.terms()[axis], x, y);
  }
  return out;
}

}  // namespace mfgh
