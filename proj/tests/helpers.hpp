#pragma once

// Shared helpers for the test suites.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "mfgh/minimize.hpp"
#include "mfgh/torus.hpp"

namespace mfgh_test {

// Quadratic-Hamiltonian exponent g(x, xi) = |xi|^2/2 + V(x) from sampled V.
inline mfgh::ExpFunctionalSpec quadratic_spec(const mfgh::TorusGrid& grid,
                                              std::vector<double> P,
                                              std::vector<double> Vvals) {
  auto vv = std::make_shared<std::vector<double>>(std::move(Vvals));
  const int d = grid.d;
  mfgh::ExpFunctionalSpec spec;
  spec.grid = grid;
  spec.drift = std::move(P);
  spec.exponent = [vv, d](std::size_t k, const double* xi) {
    double q = 0.0;
    for (int a = 0; a < d; ++a) q += xi[a] * xi[a];
    return 0.5 * q + (*vv)[k];
  };
  spec.exponent_grad = [d](std::size_t, const double* xi, double* out) {
    for (int a = 0; a < d; ++a) out[a] = xi[a];
  };
  return spec;
}

inline std::vector<double> zeros(std::size_t n) {
  return std::vector<double>(n, 0.0);
}

// High-resolution trapezoid quadrature of a smooth periodic 1D function;
// independent oracle for integral identities.
inline double periodic_quad(const std::function<double(double)>& f, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(static_cast<double>(i) / n);
  return s / n;
}

}  // namespace mfgh_test
