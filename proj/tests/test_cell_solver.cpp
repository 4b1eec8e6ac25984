#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <thread>

#include "mfgh/cell_solver.hpp"

using namespace mfgh;

TEST_CASE("solve_cell: constant potential closed form") {
  auto V = parse_potential("0.7", 2);
  auto micro = make_grid(2, 16);
  auto s = solve_cell(V, {0.0, 0.0}, {1.0, -0.5}, micro);
  REQUIRE(s.converged);
  REQUIRE(linf_norm(s.w.values) < 1e-10);
  REQUIRE(s.Htilde == Catch::Approx(0.5 * 1.25 + 0.7).margin(1e-10));
  REQUIRE(s.b[0] == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(s.b[1] == Catch::Approx(-0.5).margin(1e-10));
  for (std::size_t i = 0; i < s.m.size(); i += 13)
    REQUIRE(s.m[i] == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("solve_cell matches the 1D current-method oracle") {
  auto V = parse_potential("0.5*cos(2*pi*y1)", 1);
  auto micro = make_grid(1, 128);
  auto s = solve_cell(V, {0.0}, {1.0}, micro, {1e-11, 4000});
  auto o = cell_1d([](double y) { return 0.5 * std::cos(kTwoPi * y); }, 1.0,
                   micro);
  REQUIRE(std::abs(s.Htilde - o.Htilde) < 1e-9);
  double wgap = 0.0;
  for (std::size_t i = 0; i < micro.size(); ++i)
    wgap = std::max(wgap, std::abs(s.w[i] - o.w[i]));
  REQUIRE(wgap < 1e-7);
  REQUIRE(s.b[0] == Catch::Approx(o.j).margin(1e-9));
}

TEST_CASE("solve_cell: Lambda = 0 gives w = 0 and b = 0") {
  auto V = parse_potential("0.5*cos(2*pi*y1) + 0.2*cos(2*pi*x1)", 1);
  auto micro = make_grid(1, 64);
  auto s = solve_cell(V, {0.25}, {0.0}, micro, {1e-11, 4000});
  REQUIRE(linf_norm(s.w.values) < 1e-9);
  ScalarField ev(micro);
  double x = 0.25;
  auto vs = sample_potential_micro(V, &x, micro);
  for (std::size_t i = 0; i < micro.size(); ++i) ev[i] = std::exp(vs[i]);
  REQUIRE(s.Htilde == Catch::Approx(std::log(integrate(ev))).margin(1e-10));
  REQUIRE(std::abs(s.b[0]) < 1e-10);
}

TEST_CASE("separable decomposition matches the full 2D solve") {
  auto V = parse_separable_potential({"0.3*cos(2*pi*y1)", "0.3*cos(2*pi*y2)"}, 2);
  std::vector<double> x{0.0, 0.0};

  auto sep = solve_cell_separable(V, x, {1.0, 0.0}, make_grid(1, 64));
  // per-axis closed pieces: Lambda=0 axis has Htilde = ln I0(0.3)
  REQUIRE(sep.b[0] > 0.0);
  REQUIRE(sep.b[1] == Catch::Approx(0.0).margin(1e-12));
  auto c1 = cell_1d([](double y) { return 0.3 * std::cos(kTwoPi * y); }, 1.0,
                    make_grid(1, 64));
  REQUIRE(sep.Htilde ==
          Catch::Approx(c1.Htilde + 0.0223746886220419).margin(1e-10));

  auto full = solve_cell(V, x, {1.0, 0.0}, make_grid(2, 32), {1e-11, 4000});
  REQUIRE(std::abs(full.Htilde - sep.Htilde) < 1e-6);
  REQUIRE(std::abs(full.b[0] - sep.b[0]) < 1e-6);
  REQUIRE(std::abs(full.b[1] - sep.b[1]) < 1e-6);

  // tensor structure of the separable solution
  REQUIRE(std::abs(integrate(sep.m) - 1.0) < 1e-9);
  REQUIRE(std::abs(integrate(sep.w)) < 1e-12);

  auto Vexpr = parse_potential("0.3*cos(2*pi*y1)", 1);
  try {
    solve_cell_separable(Vexpr, {0.0}, {1.0}, make_grid(1, 64));
    FAIL("expected NotSeparable");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::not_separable);
  }

  // both terms zero: Htilde reduces to |Lambda|^2/2 exactly
  auto Vzero = parse_separable_potential({"0", "0"}, 2);
  auto z = solve_cell_separable(Vzero, {0.0, 0.0}, {1.5, -0.5}, make_grid(1, 32));
  REQUIRE(z.Htilde == Catch::Approx(0.5 * (1.5 * 1.5 + 0.25)).margin(1e-12));
  REQUIRE(linf_norm(z.w.values) < 1e-12);
}

TEST_CASE("cell invariants: coercivity, energy consistency, uniqueness, evenness") {
  auto V = parse_potential("0.5*cos(2*pi*y1)", 1);
  auto micro = make_grid(1, 128);
  auto b = potential_bounds(V, 4096);

  for (double L : {-2.0, -1.0, 0.5, 1.5, 3.0}) {
    auto s = solve_cell(V, {0.0}, {L}, micro, {1e-11, 4000});
    const double excess = s.Htilde - 0.5 * L * L;
    REQUIRE(excess >= b.vmin - 1e-2);
    REQUIRE(excess <= b.vmax + 1e-2);
    REQUIRE(std::abs(integrate(s.m) - 1.0) < 1e-9);
    // pointwise floor
    double mmin = 1e300;
    for (double v : s.m.values) mmin = std::min(mmin, v);
    REQUIRE(mmin >= std::exp(b.vmin - b.vmax - 0.5 * L * L - 1e-2));
    // gradient energy bound
    auto w2 = derivative(s.w, 0);
    ScalarField e2(micro);
    for (std::size_t i = 0; i < micro.size(); ++i) e2[i] = w2[i] * w2[i];
    REQUIRE(integrate(e2) <= 2.0 * (b.vmax - b.vmin) + 1e-2);
    // energy consistency: Htilde recomputed from the stored corrector
    auto spec = quadratic_exponent_spec(micro, {L},
                                        sample_potential_micro(V, s.x.data(), micro).values);
    REQUIRE(log_functional_value(spec, s.w) ==
            Catch::Approx(s.Htilde).margin(1e-12));
  }

  // evenness of Htilde in Lambda for even V
  auto sp = solve_cell(V, {0.0}, {1.25}, micro, {1e-11, 4000});
  auto sm = solve_cell(V, {0.0}, {-1.25}, micro, {1e-11, 4000});
  REQUIRE(std::abs(sp.Htilde - sm.Htilde) < 1e-8);

  // uniqueness under random restarts
  auto i1 = project_mean_zero(random_trig_field(micro, 0.1, 2, 31));
  auto i2 = project_mean_zero(random_trig_field(micro, 0.1, 2, 32));
  auto s1 = solve_cell(V, {0.0}, {1.0}, micro, {1e-11, 4000}, &i1);
  auto s2 = solve_cell(V, {0.0}, {1.0}, micro, {1e-11, 4000}, &i2);
  double gap = 0.0;
  for (std::size_t i = 0; i < micro.size(); ++i)
    gap = std::max(gap, std::abs(s1.w[i] - s2.w[i]));
  REQUIRE(gap < 1e-7);
  REQUIRE(std::abs(s1.Htilde - s2.Htilde) < 1e-9);
}

TEST_CASE("flux_vs_fd: flux integral equals the Lambda-gradient") {
  auto V0 = parse_potential("0", 1);
  auto r0 = flux_vs_fd(V0, {0.0}, {1.0}, make_grid(1, 32), 1e-3);
  REQUIRE(r0.max_rel_mismatch < 1e-8);

  auto V = parse_potential("0.5*cos(2*pi*y1)", 1);
  auto r = flux_vs_fd(V, {0.0}, {1.0}, make_grid(1, 64), 1e-3, {1e-11, 4000});
  REQUIRE(r.max_rel_mismatch <= 1e-4);

  auto rz = flux_vs_fd(V, {0.0}, {0.0}, make_grid(1, 64), 1e-3, {1e-11, 4000});
  REQUIRE(std::abs(rz.fd[0]) < 1e-8);
  REQUIRE(std::abs(rz.b[0]) < 1e-8);
}

TEST_CASE("tabulate_Heff and eval_Heff") {
  // V == 0: lattice equals |Lambda|^2/2 exactly; cubic reproduces it off-lattice
  auto V0 = parse_potential("0", 1);
  auto t0 = tabulate_Heff(V0, make_grid(1, 8), 3.0, 0.25, make_grid(1, 32));
  for (int j = 0; j < t0.nl; ++j) {
    double L = t0.lambda_node(j);
    REQUIRE(t0.H_at(0, j) == Catch::Approx(0.5 * L * L).margin(1e-10));
  }
  double x = 0.3;
  for (double L : {-2.817, -0.4, 0.123, 1.77, 2.96}) {
    auto [H, bb] = eval_Heff(t0, &x, &L);
    REQUIRE(H == Catch::Approx(0.5 * L * L).margin(1e-8));
    REQUIRE(bb[0] == Catch::Approx(L).margin(1e-8));
  }

  // out-of-box queries throw
  double Lout = 3.5;
  REQUIRE_THROWS_AS(eval_Heff(t0, &x, &Lout), error);

  // lattice-point queries return stored values exactly
  auto V = parse_potential("0.5*cos(2*pi*y1) + 0.25*cos(2*pi*x1)", 1);
  auto t = tabulate_Heff(V, make_grid(1, 8), 3.0, 0.25, make_grid(1, 64));
  double xg = 2.0 / 8.0;  // grid node
  double Lg = t.lambda_node(5);
  auto [Hg, bg] = eval_Heff(t, &xg, &Lg);
  REQUIRE(Hg == Catch::Approx(t.H_at(2, 5)).margin(1e-12));
  REQUIRE(bg[0] == Catch::Approx(t.b_at(2, 5, 0)).margin(1e-12));

  // coercivity band across the lattice
  auto b = potential_bounds(V, 4096);
  for (std::size_t xi = 0; xi < t.macro.size(); ++xi)
    for (int j = 0; j < t.nl; ++j) {
      double L = t.lambda_node(j);
      double excess = t.H_at(xi, j) - 0.5 * L * L;
      REQUIRE(excess >= b.vmin - 1e-2);
      REQUIRE(excess <= b.vmax + 1e-2);
    }

  // interpolated b matches the Lambda-gradient of interpolated H (5e-3)
  std::mt19937_64 rng(9);
  auto uni = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int probe = 0; probe < 20; ++probe) {
    double xp = uni();
    double Lp = -2.5 + 5.0 * uni();
    double h = 1e-4;
    double Lp1 = Lp + h, Lm1 = Lp - h;
    auto [Hp, bp] = eval_Heff(t, &xp, &Lp);
    auto [H1, b1] = eval_Heff(t, &xp, &Lp1);
    auto [H2, b2] = eval_Heff(t, &xp, &Lm1);
    REQUIRE(std::abs((H1 - H2) / (2 * h) - bp[0]) < 5e-3);
  }
}

TEST_CASE("verify_Heff_properties: convexity and derivative bounds") {
  // V == 0: Hessian is the identity
  auto V0 = parse_potential("0", 1);
  auto t0 = tabulate_Heff(V0, make_grid(1, 8), 2.0, 0.25, make_grid(1, 32));
  auto b0 = potential_bounds(V0, 4096);
  auto r0 = verify_Heff_properties(t0, b0);
  REQUIRE(r0.min_hessian_eig == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(r0.max_dH_dx < 1e-10);
  REQUIRE(r0.coercivity_pass);

  auto V = parse_potential("0.5*cos(2*pi*y1)", 1);
  auto t = tabulate_Heff(V, make_grid(1, 8), 3.0, 0.25, make_grid(1, 128));
  auto b = potential_bounds(V, 4096);
  auto r = verify_Heff_properties(t, b);
  REQUIRE(r.min_hessian_eig > 0.0);
  REQUIRE(r.coercivity_pass);
  REQUIRE(r.max_dH_dx < 1e-8);  // x-independent potential
  REQUIRE(std::isfinite(r.max_dH_dLambda_rel));
  REQUIRE(std::isfinite(r.max_hessian_abs));

  // separable 2D: positive-definite FD Hessian
  auto V2 = parse_separable_potential({"0.3*cos(2*pi*y1)", "0.3*cos(2*pi*y2)"}, 2);
  auto t2 = tabulate_Heff(V2, make_grid(2, 8), 2.0, 0.5, make_grid(1, 64));
  auto b2 = potential_bounds(V2, 4096);
  auto r2 = verify_Heff_properties(t2, b2);
  REQUIRE(r2.min_hessian_eig > 0.0);
  REQUIRE(r2.coercivity_pass);
}

TEST_CASE("provider memoization is safe under concurrent queries") {
  auto V = parse_potential("0.25*cos(2*pi*x1) + 0.5*cos(2*pi*y1)", 1);
  auto macro = make_grid(1, 16);
  DirectCellProvider cells(V, macro, make_grid(1, 64));

  std::vector<std::thread> workers;
  std::vector<double> results(4, 0.0);
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&cells, &results, t] {
      double acc = 0.0;
      for (int i = 0; i < 50; ++i) {
        double L = 0.5 + 0.01 * (i % 10);  // deliberate overlap across threads
        acc += cells.eval(i % 16, &L).H;
      }
      results[t] = acc;
    });
  }
  for (auto& w : workers) w.join();
  for (int t = 1; t < 4; ++t)
    REQUIRE(results[t] == Catch::Approx(results[0]).margin(1e-12));
}

TEST_CASE("cell providers: direct (memoized) and table-backed agree") {
  auto V = parse_potential("0.25*cos(2*pi*x1) + 0.5*cos(2*pi*y1)", 1);
  auto macro = make_grid(1, 16);
  auto micro = make_grid(1, 128);
  DirectCellProvider direct(V, macro, micro);
  REQUIRE(direct.uses_current_method());

  auto t = tabulate_Heff(V, macro, 3.0, 0.1, micro);
  TableCellProvider table(t, macro);

  double L = 1.234;
  for (std::size_t k : {std::size_t{0}, std::size_t{5}, std::size_t{11}}) {
    auto ed = direct.eval(k, &L);
    auto ed2 = direct.eval(k, &L);  // memo hit returns the identical value
    REQUIRE(ed.H == ed2.H);
    auto et = table.eval(k, &L);
    REQUIRE(et.H == Catch::Approx(ed.H).margin(5e-6));
    REQUIRE(et.b[0] == Catch::Approx(ed.b[0]).margin(5e-4));
  }

  // full solve supports reconstruction fields
  auto full = direct.solve_full(3, &L);
  REQUIRE(std::abs(integrate(full.m) - 1.0) < 1e-9);
  REQUIRE(std::abs(integrate(full.w)) < 1e-12);
  REQUIRE_THROWS_AS(table.solve_full(3, &L), error);

  // direct provider agrees with the variational cell solve
  double xq[1];
  macro.node(3, xq);
  auto vcell = solve_cell(V, {xq[0]}, {L}, micro, {1e-11, 4000});
  auto ed = direct.eval(3, &L);
  REQUIRE(std::abs(vcell.Htilde - ed.H) < 1e-9);
  REQUIRE(std::abs(vcell.b[0] - ed.b[0]) < 1e-8);
}
