#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfgh/torus.hpp"

using namespace mfgh;

namespace {

// Independent quadrature oracle: plain midpoint Riemann sum at 1e6 points,
// no shared code with integrate().
double riemann_1d(double (*f)(double), int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f((i + 0.5) / n);
  return s / n;
}

double cos2(double x) { return std::cos(kTwoPi * x) * std::cos(kTwoPi * x); }

ScalarField sample_1d(const TorusGrid& g, double (*f)(double)) {
  ScalarField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(i * g.h);
  return u;
}

}  // namespace

TEST_CASE("make_grid basics and preconditions") {
  auto g = make_grid(1, 8);
  REQUIRE(g.h == Catch::Approx(0.125));
  REQUIRE(g.size() == 8);
  double x[1];
  g.node(5, x);
  REQUIRE(x[0] == Catch::Approx(0.625));

  auto g2 = make_grid(2, 16);
  REQUIRE(g2.size() == 256);
  REQUIRE(g2.cell_weight() == Catch::Approx(1.0 / 256));

  REQUIRE_THROWS_AS(make_grid(1, 7), error);
  REQUIRE_THROWS_AS(make_grid(1, 6), error);
  REQUIRE_THROWS_AS(make_grid(4, 16), error);
  REQUIRE_THROWS_AS(make_grid(0, 16), error);
  try {
    make_grid(1, 7);
  } catch (const error& e) {
    REQUIRE(e.code() == errc::odd_grid_size);
  }
}

TEST_CASE("integrate: unit volume, resolved modes, cos^2 vs Riemann oracle") {
  for (int d = 1; d <= 3; ++d) {
    ScalarField one(make_grid(d, 8));
    for (auto& v : one.values) v = 1.0;
    REQUIRE(integrate(one) == Catch::Approx(1.0).margin(1e-14));
  }

  auto g = make_grid(1, 16);
  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(kTwoPi * i * g.h);
  REQUIRE(std::abs(integrate(s)) < 1e-14);

  // Frozen expected value 0.5 confirmed by the independent Riemann oracle.
  const double oracle = riemann_1d(&cos2, 1000000);
  REQUIRE(oracle == Catch::Approx(0.5).margin(1e-9));
  auto c2 = sample_1d(g, &cos2);
  REQUIRE(integrate(c2) == Catch::Approx(0.5).margin(1e-14));

  ScalarField bad(g);
  bad[3] = std::nan("");
  REQUIRE_THROWS_AS(integrate(bad), error);
}

TEST_CASE("quadrature exactness for trig polynomials below Nyquist") {
  auto g = make_grid(1, 16);
  // sum of modes of degree < n/2 integrates to its mean exactly
  ScalarField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double x = i * g.h;
    u[i] = 0.7 + 1.3 * std::cos(kTwoPi * 3 * x) - 0.4 * std::sin(kTwoPi * 7 * x);
  }
  REQUIRE(integrate(u) == Catch::Approx(0.7).margin(1e-13));
}

TEST_CASE("gradient: constants, resolved 1D mode, 2D analytic oracle") {
  auto g = make_grid(1, 16);
  ScalarField c(g);
  for (auto& v : c.values) v = 3.25;
  auto gc = gradient(c);
  REQUIRE(linf_norm(gc[0]) < 1e-13);

  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(kTwoPi * i * g.h);
  auto gs = gradient(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(gs[0][i] ==
            Catch::Approx(kTwoPi * std::cos(kTwoPi * i * g.h)).margin(1e-11));
  }

  // u(x1,x2) = sin(2 pi x1) cos(4 pi x2); oracle: symbolic gradient on nodes
  auto g2 = make_grid(2, 32);
  ScalarField u(g2);
  double x[2];
  for (std::size_t i = 0; i < u.size(); ++i) {
    g2.node(i, x);
    u[i] = std::sin(kTwoPi * x[0]) * std::cos(2 * kTwoPi * x[1]);
  }
  auto gu = gradient(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    g2.node(i, x);
    double d0 = kTwoPi * std::cos(kTwoPi * x[0]) * std::cos(2 * kTwoPi * x[1]);
    double d1 = -2 * kTwoPi * std::sin(kTwoPi * x[0]) * std::sin(2 * kTwoPi * x[1]);
    REQUIRE(gu[0][i] == Catch::Approx(d0).margin(1e-10));
    REQUIRE(gu[1][i] == Catch::Approx(d1).margin(1e-10));
  }
}

TEST_CASE("divergence: constants, second derivative, adjoint identity") {
  auto g = make_grid(1, 16);
  VectorField w(g);
  for (auto& v : w[0]) v = 2.0;
  REQUIRE(linf_norm(divergence(w).values) < 1e-13);

  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(kTwoPi * i * g.h);
  auto ds = divergence(gradient(s));
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(ds[i] ==
            Catch::Approx(-kTwoPi * kTwoPi * s[i]).margin(1e-9));
  }

  // adjoint identity on random smooth fields, all dimensions
  for (int d = 1; d <= 3; ++d) {
    auto gd = make_grid(d, d == 3 ? 8 : 16);
    auto u = random_trig_field(gd, 1.0, 3, 12345 + d);
    VectorField v(gd);
    for (int a = 0; a < d; ++a)
      v[a] = random_trig_field(gd, 1.0, 3, 999 * d + a).values;
    ScalarField udivv(gd);
    auto dv = divergence(v);
    for (std::size_t i = 0; i < u.size(); ++i) udivv[i] = u[i] * dv[i];
    auto gu = gradient(u);
    ScalarField gudotv(gd);
    for (std::size_t i = 0; i < u.size(); ++i) {
      double dot = 0.0;
      for (int a = 0; a < d; ++a) dot += gu[a][i] * v[a][i];
      gudotv[i] = dot;
    }
    REQUIRE(std::abs(integrate(udivv) + integrate(gudotv)) < 1e-12);
  }
}

TEST_CASE("project_mean_zero: constants, shifted mode, idempotence") {
  auto g = make_grid(1, 16);
  ScalarField c(g);
  for (auto& v : c.values) v = 5.0;
  REQUIRE(linf_norm(project_mean_zero(c).values) < 1e-13);

  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = std::sin(kTwoPi * i * g.h) + 3.0;
  auto p = project_mean_zero(s);
  for (std::size_t i = 0; i < s.size(); ++i)
    REQUIRE(p[i] == Catch::Approx(std::sin(kTwoPi * i * g.h)).margin(1e-13));
  REQUIRE(std::abs(integrate(p)) < 1e-13);

  auto pp = project_mean_zero(p);
  for (std::size_t i = 0; i < s.size(); ++i)
    REQUIRE(pp[i] == Catch::Approx(p[i]).margin(1e-14));
}

TEST_CASE("antiderivative inverts derivative on mean-zero data") {
  auto g = make_grid(1, 32);
  auto u = project_mean_zero(random_trig_field(g, 1.0, 5, 77));
  auto du = derivative(u, 0);
  auto v = antiderivative_mean_zero(du, 0);
  for (std::size_t i = 0; i < u.size(); ++i)
    REQUIRE(v[i] == Catch::Approx(u[i]).margin(1e-12));
}

TEST_CASE("spectral interpolant reproduces field and off-grid trig values") {
  auto g = make_grid(1, 16);
  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = 0.5 + std::cos(kTwoPi * 2 * i * g.h);
  SpectralInterpolant ip(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double x = i * g.h;
    REQUIRE(ip(&x) == Catch::Approx(s[i]).margin(1e-12));
  }
  double x = 0.1234567;
  REQUIRE(ip(&x) == Catch::Approx(0.5 + std::cos(kTwoPi * 2 * x)).margin(1e-12));

  auto g2 = make_grid(2, 16);
  ScalarField f2(g2);
  double xy[2];
  for (std::size_t i = 0; i < f2.size(); ++i) {
    g2.node(i, xy);
    f2[i] = std::sin(kTwoPi * xy[0]) * std::cos(kTwoPi * 3 * xy[1]);
  }
  SpectralInterpolant ip2(f2);
  double probe[2] = {0.31, 0.77};
  REQUIRE(ip2(probe) == Catch::Approx(std::sin(kTwoPi * 0.31) *
                                      std::cos(kTwoPi * 3 * 0.77))
                            .margin(1e-11));
}
