#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mfgh/potential.hpp"

using namespace mfgh;

TEST_CASE("parse_potential accepts the documented grammar") {
  REQUIRE_NOTHROW(parse_potential("0.5*cos(2*pi*y1)", 1));
  REQUIRE_NOTHROW(parse_potential("cos(2*pi*x1)*sin(2*pi*y1)", 1));
  REQUIRE_NOTHROW(parse_potential("0", 1));
  REQUIRE_NOTHROW(parse_potential("exp(cos(2*pi*x1)) + sin(4*pi*y1)", 1));
  REQUIRE_NOTHROW(parse_potential("sin(2*pi*3*y2)", 2));
  REQUIRE_NOTHROW(parse_potential("-0.25*cos(2*pi*y1)", 1));
}

TEST_CASE("parser rejects bad input with typed errors") {
  auto code_of = [](const std::string& text, int d) {
    try {
      parse_potential(text, d);
    } catch (const error& e) {
      return e.code();
    }
    return errc::bad_config;
  };
  CHECK(code_of("y1", 1) == errc::periodicity_violation);
  CHECK(code_of("y1 + cos(2*pi*y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("sin(y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("sin(2*pi*y1 + x1)", 1) == errc::periodicity_violation);
  CHECK(code_of("exp(y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("sin(pi*y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("sin(2*pi*pi*y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("sin(2*pi*0*y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("cos(2*pi*y1*y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("cos(2*pi*x1*y1)", 1) == errc::periodicity_violation);
  CHECK(code_of("y2", 1) == errc::periodicity_violation);
  CHECK(code_of("x2", 1) == errc::dimension_error);
  CHECK(code_of("cos(2*pi*y3)", 2) == errc::dimension_error);
  CHECK(code_of("1 +", 1) == errc::syntax_error);
  CHECK(code_of("cos(2*pi*y1", 1) == errc::syntax_error);
  CHECK(code_of("foo(x1)", 1) == errc::syntax_error);
  CHECK(code_of("1 / 2", 1) == errc::syntax_error);
}

TEST_CASE("eval_potential: direct values and y-periodicity") {
  auto zero = parse_potential("0", 2);
  double x[2] = {0.3, 0.9}, y[2] = {0.1, 0.7};
  REQUIRE(eval_potential(zero, x, y) == 0.0);

  auto v = parse_potential("0.5*cos(2*pi*y1)", 1);
  double y0 = 0.0, y25 = 0.25;
  double x0 = 0.0;
  REQUIRE(eval_potential(v, &x0, &y0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(eval_potential(v, &x0, &y25) == Catch::Approx(0.0).margin(1e-15));

  // periodicity under y -> y + 1, quantified over random points
  auto w = parse_potential("cos(2*pi*x1)*sin(4*pi*y1) + exp(0.2*cos(2*pi*y1))", 1);
  std::mt19937_64 rng(42);
  auto uni = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 1000; ++i) {
    double xi = uni(), yi = 4.0 * uni() - 2.0, ys = yi + 1.0;
    REQUIRE(std::abs(eval_potential(w, &xi, &yi) -
                     eval_potential(w, &xi, &ys)) < 1e-12);
  }
}

TEST_CASE("parse-print-parse round trip yields an identical AST") {
  const char* cases[] = {
      "0.5*cos(2*pi*y1)",
      "cos(2*pi*x1)*sin(2*pi*y1)",
      "1 + 2*x1 - (3 - x1)*sin(2*pi*y1)",
      "-0.125*cos(2*pi*2*y1) + exp(x1*x1)",
      "0.1*sin(2*pi*y2)*cos(4*pi*y1) + x2",
  };
  for (const char* c : cases) {
    int d = std::string(c).find('2') != std::string::npos ? 2 : 1;
    auto e1 = parse_expr_checked(c, 2);
    auto printed = print_expr(*e1);
    auto e2 = parse_expr_checked(printed, 2);
    INFO(c << "  ->  " << printed);
    REQUIRE(expr_equal(*e1, *e2));
    REQUIRE(print_expr(*e2) == printed);
    (void)d;
  }
}

TEST_CASE("separable potentials: validation and sum evaluation") {
  auto s = parse_separable_potential(
      {"0.3*cos(2*pi*y1)", "0.3*cos(2*pi*y2)"}, 2);
  REQUIRE(s.is_separable());

  // term 1 may not reference y2
  REQUIRE_THROWS_AS(
      parse_separable_potential({"cos(2*pi*y2)", "cos(2*pi*y2)"}, 2), error);

  // eval equals the sum of per-axis terms
  std::mt19937_64 rng(7);
  auto uni = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto t1 = parse_potential("0.3*cos(2*pi*y1)", 2);
  auto t2 = parse_potential("0.3*cos(2*pi*y2)", 2);
  for (int i = 0; i < 200; ++i) {
    double x[2] = {uni(), uni()}, y[2] = {uni(), uni()};
    double lhs = eval_potential(s, x, y);
    double rhs = eval_potential(t1, x, y) + eval_potential(t2, x, y);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("potential_bounds: analytic extrema within 1e-3") {
  auto zero = parse_potential("0", 1);
  auto b0 = potential_bounds(zero, 4096);
  REQUIRE(b0.vmin == 0.0);
  REQUIRE(b0.vmax == 0.0);

  auto v = parse_potential("0.5*cos(2*pi*y1)", 1);
  auto b = potential_bounds(v, 4096);
  REQUIRE(b.vmin == Catch::Approx(-0.5).margin(1e-3));
  REQUIRE(b.vmax == Catch::Approx(0.5).margin(1e-3));

  auto w = parse_potential("cos(2*pi*x1) + cos(2*pi*y1)", 1);
  auto bw = potential_bounds(w, 4096);
  REQUIRE(bw.vmin == Catch::Approx(-2.0).margin(1e-3));
  REQUIRE(bw.vmax == Catch::Approx(2.0).margin(1e-3));

  // sampled bounds always bracket from inside
  REQUIRE(bw.vmin >= -2.0 - 1e-12);
  REQUIRE(bw.vmax <= 2.0 + 1e-12);

  REQUIRE_THROWS_AS(potential_bounds(v, 32), error);
}

TEST_CASE("eps and micro sampling of the potential") {
  auto v = parse_potential("0.5*cos(2*pi*y1)", 1);
  auto g = make_grid(1, 16);
  auto f = sample_potential_eps(v, g, 4);  // V(x, 4x)
  for (std::size_t i = 0; i < f.size(); ++i) {
    double x = i * g.h;
    REQUIRE(f[i] == Catch::Approx(0.5 * std::cos(kTwoPi * 4 * x)).margin(1e-14));
  }
  REQUIRE_THROWS_AS(sample_potential_eps(v, g, 3), error);  // 16 % 3 != 0

  auto vx = parse_potential("cos(2*pi*x1) + 0.5*cos(2*pi*y1)", 1);
  double x0 = 0.25;
  auto slice = sample_potential_micro(vx, &x0, g);
  for (std::size_t i = 0; i < slice.size(); ++i) {
    double y = i * g.h;
    REQUIRE(slice[i] == Catch::Approx(std::cos(kTwoPi * 0.25) +
                                      0.5 * std::cos(kTwoPi * y))
                            .margin(1e-14));
  }
}
