#pragma once

// Batch front door: JSON config in, subcommand dispatch, JSON + CSV artifacts
// out. Exit codes: 0 success, 1 solver failure, 2 config/parse error.
// Identical config + seed produce bit-identical reports; wall-clock data
// lives only in the manifest.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfgh/convergence.hpp"
#include "mfgh/eps_solver.hpp"
#include "mfgh/errors.hpp"
#include "mfgh/homog_solver.hpp"
#include "mfgh/io.hpp"
#include "mfgh/oracle1d.hpp"
#include "mfgh/potential.hpp"

namespace mfgh {

struct RunConfig {
  nlohmann::json raw;
  std::string hash;

  int d = 1;
  std::vector<double> P;
  PotentialSpec V;
  std::vector<int> ks;  // eps = 1/k
  int macro_n = 64;
  int micro_n = 128;
  int points_per_eps = 16;
  int eps_n = 0;  // explicit eps-grid size; 0 = resolution rule
  double tol = 1e-10;
  int max_iter = 4000;
  double lambda_max = 0.0;  // 0 = rule |P| + 2 osc(V) + 1
  double lambda_step = 0.25;
  std::vector<double> cell_x, cell_lambda;
  std::vector<TestFunctionSpec> battery;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool has_seed = false;
};

inline int parse_eps_string(const std::string& s) {
  if (s.size() >= 3 && s[0] == '1' && s[1] == '/') {
    const std::string tail = s.substr(2);
    if (!tail.empty() &&
        tail.find_first_not_of("0123456789") == std::string::npos) {
      long k = std::stol(tail);
      require(k >= 1, errc::bad_config, "eps must be 1/k with k >= 1");
      return static_cast<int>(k);
    }
  }
  fail(errc::bad_config, "eps must be written as \"1/k\", got \"" + s + "\"");
}

// Grid for eps = 1/k: the explicit size must already resolve x/eps; the rule
// size is points_per_eps * k raised to the next even value.
inline int eps_grid_n(const RunConfig& cfg, int k) {
  if (cfg.eps_n > 0) {
    require(cfg.eps_n % k == 0, errc::grid_incommensurate,
            "configured eps grid n = " + std::to_string(cfg.eps_n) +
                " is not a multiple of k = " + std::to_string(k));
    return cfg.eps_n;
  }
  int n = cfg.points_per_eps * k;
  if (n % 2 != 0) n += k;  // k odd and points_per_eps odd
  while (n < 8 || n % 2 != 0) n += 2 * k;
  return n;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.raw = j;
  cfg.hash = config_hash(j);
  try {
    cfg.d = j.at("dimension").get<int>();
    require(cfg.d >= 1 && cfg.d <= 3, errc::bad_config,
            "dimension must be 1, 2, or 3");

    cfg.P = j.at("P").get<std::vector<double>>();
    require(static_cast<int>(cfg.P.size()) == cfg.d, errc::bad_config,
            "P must have 'dimension' entries");

    const auto& pot = j.at("potential");
    const std::string kind = pot.at("kind").get<std::string>();
    const int pd = pot.value("d", cfg.d);
    require(pd == cfg.d, errc::bad_config,
            "potential dimension disagrees with 'dimension'");
    auto terms = pot.at("terms").get<std::vector<std::string>>();
    if (kind == "expression") {
      require(terms.size() == 1, errc::bad_config,
              "expression potential takes exactly one term");
      cfg.V = parse_potential(terms[0], cfg.d);
    } else if (kind == "separable") {
      cfg.V = parse_separable_potential(terms, cfg.d);
    } else {
      fail(errc::bad_config, "potential.kind must be expression or separable");
    }

    for (const auto& e : j.value("eps", std::vector<std::string>{}))
      cfg.ks.push_back(parse_eps_string(e));
    for (std::size_t i = 1; i < cfg.ks.size(); ++i)
      require(cfg.ks[i] > cfg.ks[i - 1], errc::bad_config,
              "eps list must be strictly decreasing");

    if (j.contains("grids")) {
      const auto& g = j["grids"];
      cfg.macro_n = g.value("macro_n", cfg.macro_n);
      cfg.micro_n = g.value("micro_n", cfg.micro_n);
      cfg.points_per_eps = g.value("points_per_eps", cfg.points_per_eps);
      cfg.eps_n = g.value("eps_n", 0);
    }
    if (j.contains("solver")) {
      cfg.tol = j["solver"].value("tol", cfg.tol);
      cfg.max_iter = j["solver"].value("max_iter", cfg.max_iter);
      require(cfg.tol > 0.0, errc::bad_config, "solver.tol must be positive");
    }
    if (j.contains("lambda_box")) {
      cfg.lambda_max = j["lambda_box"].value("max", 0.0);
      cfg.lambda_step = j["lambda_box"].value("step", cfg.lambda_step);
      require(cfg.lambda_step > 0.0, errc::bad_config,
              "lambda_box.step must be positive");
    }
    if (j.contains("cell")) {
      cfg.cell_x = j["cell"].value("x", std::vector<double>{});
      cfg.cell_lambda = j["cell"].value("lambda", std::vector<double>{});
    }
    for (const auto& t : j.value("test_functions", std::vector<std::string>{}))
      cfg.battery.push_back(parse_test_function(t, cfg.d));
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("seed")) {
      cfg.seed = j["seed"].get<std::uint64_t>();
      cfg.has_seed = true;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_config, std::string("config schema error: ") + e.what());
  }
  return cfg;
}

namespace detail {

inline bool is_config_error(errc c) {
  switch (c) {
    case errc::bad_config:
    case errc::syntax_error:
    case errc::periodicity_violation:
    case errc::dimension_error:
    case errc::bad_dimension:
    case errc::odd_grid_size:
    case errc::grid_too_small:
    case errc::grid_incommensurate:
    case errc::not_separable:
      return true;
    default:
      return false;
  }
}

inline double lambda_box_rule(const RunConfig& cfg, const PotentialBounds& vb) {
  if (cfg.lambda_max > 0.0) return cfg.lambda_max;
  double pnorm = 0.0;
  for (double p : cfg.P) pnorm += p * p;
  return std::sqrt(pnorm) + 2.0 * (vb.vmax - vb.vmin) + 1.0;
}

struct Artifacts {
  std::filesystem::path dir;
  std::vector<std::string> names;
  std::filesystem::path file(const std::string& name) {
    names.push_back(name);
    return dir / name;
  }
};

inline nlohmann::json eps_solution_header(const EpsSolution& s,
                                          const RunConfig& cfg) {
  auto res = residuals_eps(s);
  return {{"config_hash", cfg.hash},
          {"k", s.problem.k},
          {"n", s.problem.grid.n},
          {"P", s.problem.P},
          {"Hbar", s.Hbar},
          {"I_value", s.I_value},
          {"iterations", s.iterations},
          {"grad_norm", s.grad_norm},
          {"converged", s.converged},
          {"residual_hj", res.hj},
          {"residual_transport", res.transport}};
}

inline nlohmann::json uniqueness_probe_eps(const EpsProblem& p,
                                           const EpsSolution& base,
                                           const RunConfig& cfg) {
  auto init =
      project_mean_zero(random_trig_field(p.grid, 0.1, 2, cfg.seed + 1));
  auto alt = solve_eps(p, {cfg.tol, cfg.max_iter}, &init);
  double ugap = 0.0;
  for (std::size_t i = 0; i < base.u.size(); ++i)
    ugap = std::max(ugap, std::abs(base.u[i] - alt.u[i]));
  return {{"seed", cfg.seed},
          {"u_gap_sup", ugap},
          {"Hbar_gap", std::abs(base.Hbar - alt.Hbar)}};
}

inline int cmd_solve_eps(const RunConfig& cfg, Artifacts& art,
                         nlohmann::json& manifest_extra) {
  require(!cfg.ks.empty(), errc::bad_config, "config has an empty eps list");
  nlohmann::json index = nlohmann::json::array();
  for (int k : cfg.ks) {
    auto grid = make_grid(cfg.d, eps_grid_n(cfg, k));
    EpsProblem p{cfg.V, cfg.P, k, grid};
    auto s = solve_eps(p, {cfg.tol, cfg.max_iter});
    auto header = eps_solution_header(s, cfg);
    auto vb = potential_bounds(cfg.V, cfg.d == 1 ? 65536 : 1048576L);
    header["bounds"] = bound_report_json(verify_bounds_eps(s, vb));
    if (cfg.has_seed) header["uniqueness"] = uniqueness_probe_eps(p, s, cfg);
    const std::string stem = "eps-1_" + std::to_string(k);
    write_json(art.file(stem + ".json"), header);
    export_fields_csv(art.file(stem + ".csv"), grid, {"u", "m"},
                      {&s.u, &s.m});
    index.push_back(stem);
  }
  manifest_extra["solutions"] = index;
  return 0;
}

inline int cmd_solve_cell(const RunConfig& cfg, Artifacts& art,
                          nlohmann::json& manifest_extra) {
  require(static_cast<int>(cfg.cell_x.size()) == cfg.d &&
              static_cast<int>(cfg.cell_lambda.size()) == cfg.d,
          errc::bad_config, "config.cell needs x and lambda of length d");
  auto micro = make_grid(cfg.d, cfg.micro_n);
  auto s = solve_cell(cfg.V, cfg.cell_x, cfg.cell_lambda, micro,
                      {cfg.tol, cfg.max_iter});
  nlohmann::json header = {{"config_hash", cfg.hash},
                           {"x", s.x},
                           {"Lambda", s.Lambda},
                           {"Htilde", s.Htilde},
                           {"b", s.b},
                           {"iterations", s.iterations},
                           {"grad_norm", s.grad_norm},
                           {"converged", s.converged},
                           {"w_spectral_tail", corrector_spectral_tail(s.w)}};
  // cross-check against the current-method route where it applies
  if (cfg.d == 1) {
    const double* xp = cfg.cell_x.data();
    auto slice = [&cfg, xp](double y) { return cfg.V.eval(xp, &y); };
    auto c = cell_1d(slice, cfg.cell_lambda[0], make_grid(1, cfg.micro_n));
    header["current_method_Htilde"] = c.Htilde;
    header["current_method_gap"] = std::abs(c.Htilde - s.Htilde);
  } else if (cfg.V.is_separable()) {
    auto c = solve_cell_separable(cfg.V, cfg.cell_x, cfg.cell_lambda,
                                  make_grid(1, cfg.micro_n));
    header["current_method_Htilde"] = c.Htilde;
    header["current_method_gap"] = std::abs(c.Htilde - s.Htilde);
  }
  write_json(art.file("cell.json"), header);
  export_fields_csv(art.file("cell.csv"), micro, {"w", "m"}, {&s.w, &s.m});
  manifest_extra["Htilde"] = s.Htilde;
  return 0;
}

inline int cmd_tabulate(const RunConfig& cfg, Artifacts& art,
                        nlohmann::json& manifest_extra) {
  auto vb = potential_bounds(cfg.V, cfg.d == 1 ? 65536 : 1048576L);
  const double lmax = lambda_box_rule(cfg, vb);
  auto macro = make_grid(cfg.d, cfg.macro_n);
  auto micro = make_grid(cfg.d, cfg.micro_n);
  auto t = tabulate_Heff(cfg.V, macro, lmax, cfg.lambda_step, micro,
                         {cfg.tol, cfg.max_iter});
  save_table(t, art.file("heff-table.json"), art.file("heff-table.csv"),
             cfg.hash);
  auto rep = verify_Heff_properties(t, vb);
  nlohmann::json props = {{"config_hash", cfg.hash},
                          {"lambda_max", lmax},
                          {"lambda_step", cfg.lambda_step},
                          {"max_dH_dx", rep.max_dH_dx},
                          {"max_dH_dLambda_rel", rep.max_dH_dLambda_rel},
                          {"min_hessian_eig", rep.min_hessian_eig},
                          {"max_hessian_abs", rep.max_hessian_abs},
                          {"coercivity_pass", rep.coercivity_pass},
                          {"coercivity_worst_margin", rep.coercivity_worst}};
  write_json(art.file("heff-properties.json"), props);
  manifest_extra["lambda_max"] = lmax;
  return 0;
}

inline int cmd_solve_homog(const RunConfig& cfg, Artifacts& art,
                           nlohmann::json& manifest_extra,
                           HomogSolution* out_solution = nullptr,
                           std::shared_ptr<DirectCellProvider>* out_cells = nullptr) {
  auto macro = make_grid(cfg.d, cfg.macro_n);
  auto micro = make_grid(cfg.d, cfg.micro_n);
  auto cells = std::make_shared<DirectCellProvider>(cfg.V, macro, micro,
                                                    SolveOptions{cfg.tol, cfg.max_iter});
  auto s = solve_homog(*cells, cfg.P, macro, {cfg.tol, cfg.max_iter});
  nlohmann::json header = {{"config_hash", cfg.hash},
                           {"P", cfg.P},
                           {"macro_n", macro.n},
                           {"micro_n", micro.n},
                           {"Hbar", s.Hbar},
                           {"I_value", s.I_value},
                           {"iterations", s.iterations},
                           {"grad_norm", s.grad_norm},
                           {"converged", s.converged},
                           {"m0_mass", integrate(s.m0)}};
  if (cfg.has_seed) {
    auto init =
        project_mean_zero(random_trig_field(macro, 0.1, 2, cfg.seed + 1));
    auto alt = solve_homog(*cells, cfg.P, macro, {cfg.tol, cfg.max_iter}, &init);
    double ugap = 0.0;
    for (std::size_t i = 0; i < s.u0.size(); ++i)
      ugap = std::max(ugap, std::abs(s.u0[i] - alt.u0[i]));
    header["uniqueness"] = {{"seed", cfg.seed},
                            {"u_gap_sup", ugap},
                            {"Hbar_gap", std::abs(s.Hbar - alt.Hbar)}};
  }
  write_json(art.file("homog.json"), header);
  export_fields_csv(art.file("homog.csv"), macro, {"u0", "m0"},
                    {&s.u0, &s.m0});
  manifest_extra["Hbar"] = s.Hbar;
  if (out_solution) *out_solution = std::move(s);
  if (out_cells) *out_cells = cells;
  return 0;
}

inline int cmd_reconstruct(const RunConfig& cfg, Artifacts& art,
                           nlohmann::json& manifest_extra) {
  HomogSolution hs;
  std::shared_ptr<DirectCellProvider> cells;
  cmd_solve_homog(cfg, art, manifest_extra, &hs, &cells);
  auto t = reconstruct_two_scale(hs, *cells, cfg.V);
  auto res = residuals_two_scale(t, cfg.V);
  nlohmann::json header = {
      {"config_hash", cfg.hash},
      {"I_hat", t.I_hat},
      {"I_bar", t.I_bar},
      {"energy_identity_rel", std::abs(t.I_hat - t.I_bar) / t.I_hat},
      {"residual_hj_sup", res.hj_sup},
      {"residual_macro_transport", res.macro_transport},
      {"residual_micro_transport", res.micro_transport}};
  write_json(art.file("two-scale.json"), header);

  // sliced corrector and density: one row per (x node, y node)
  std::vector<std::string> cols;
  for (int a = 0; a < cfg.d; ++a) cols.push_back("x" + std::to_string(a + 1));
  for (int a = 0; a < cfg.d; ++a) cols.push_back("y" + std::to_string(a + 1));
  cols.push_back("u1");
  cols.push_back("m");
  CsvWriter csv(art.file("two-scale.csv"), cols);
  const TorusGrid& macro = t.homog.macro;
  double x[3], y[3];
  std::vector<double> row(2 * cfg.d + 2);
  for (std::size_t k = 0; k < macro.size(); ++k) {
    macro.node(k, x);
    for (std::size_t i = 0; i < t.micro.size(); ++i) {
      t.micro.node(i, y);
      std::size_t c = 0;
      for (int a = 0; a < cfg.d; ++a) row[c++] = x[a];
      for (int a = 0; a < cfg.d; ++a) row[c++] = y[a];
      row[c++] = t.u1[k][i];
      row[c++] = t.m[k][i];
      csv.row(row);
    }
  }
  manifest_extra["energy_identity_rel"] =
      std::abs(t.I_hat - t.I_bar) / t.I_hat;
  return 0;
}

inline int cmd_converge(const RunConfig& cfg, Artifacts& art,
                        nlohmann::json& manifest_extra) {
  require(!cfg.ks.empty(), errc::bad_config, "config has an empty eps list");
  ConvergenceStudyConfig scfg;
  scfg.V = cfg.V;
  scfg.P = cfg.P;
  scfg.ks = cfg.ks;
  scfg.points_per_eps = cfg.points_per_eps;
  scfg.limit_macro_n = cfg.macro_n;
  scfg.limit_micro_n = cfg.micro_n;
  scfg.tol = cfg.tol;
  scfg.max_iter = cfg.max_iter;
  scfg.battery = cfg.battery;
  auto rep = run_convergence_study(scfg);
  write_json(art.file("report.json"), convergence_report_json(rep, cfg.hash));
  write_convergence_csv(art.file("report.csv"), rep);
  manifest_extra["Hbar_ref"] = rep.Hbar_ref;
  return 0;
}

inline int cmd_oracle_1d(const RunConfig& cfg, Artifacts& art,
                         nlohmann::json& manifest_extra) {
  require(cfg.d == 1, errc::bad_config, "oracle-1d requires dimension 1");
  require(!cfg.ks.empty(), errc::bad_config, "config has an empty eps list");
  nlohmann::json index = nlohmann::json::array();
  for (int k : cfg.ks) {
    auto grid = make_grid(1, eps_grid_n(cfg, k));
    auto p = solve_eps_1d(cfg.V, cfg.P[0], k, grid);
    const std::string stem = "oracle-eps-1_" + std::to_string(k);
    write_json(art.file(stem + ".json"), {{"config_hash", cfg.hash},
                                          {"k", k},
                                          {"n", grid.n},
                                          {"j", p.j},
                                          {"Hbar", p.Hbar}});
    export_fields_csv(art.file(stem + ".csv"), grid, {"u", "m"},
                      {&p.u, &p.m});
    index.push_back(stem);
  }
  auto lim = solve_limit_1d(cfg.V, cfg.P[0], make_grid(1, cfg.macro_n),
                            make_grid(1, cfg.micro_n));
  write_json(art.file("oracle-limit.json"), {{"config_hash", cfg.hash},
                                             {"j", lim.j},
                                             {"Hbar", lim.Hbar},
                                             {"macro_n", cfg.macro_n},
                                             {"micro_n", cfg.micro_n}});
  {
    CsvWriter csv(art.file("oracle-limit.csv"), {"x", "y", "m", "u1"});
    for (std::size_t i = 0; i < lim.macro.size(); ++i)
      for (std::size_t j = 0; j < lim.micro.size(); ++j)
        csv.row({i * lim.macro.h, j * lim.micro.h, lim.m_at(i, j),
                 lim.u1[i * lim.micro.size() + j]});
  }
  export_fields_csv(art.file("oracle-limit-u0.csv"), lim.macro, {"u0"},
                    {&lim.u0});
  manifest_extra["limit_Hbar"] = lim.Hbar;
  manifest_extra["solutions"] = index;
  return 0;
}

inline int cmd_verify_bounds(const RunConfig& cfg, Artifacts& art,
                             nlohmann::json& manifest_extra) {
  require(!cfg.ks.empty(), errc::bad_config, "config has an empty eps list");
  auto vb = potential_bounds(cfg.V, cfg.d == 1 ? 65536 : 1048576L);
  nlohmann::json entries = nlohmann::json::array();
  bool all = true;
  for (int k : cfg.ks) {
    auto grid = make_grid(cfg.d, eps_grid_n(cfg, k));
    EpsProblem p{cfg.V, cfg.P, k, grid};
    auto s = solve_eps(p, {cfg.tol, cfg.max_iter});
    auto rep = verify_bounds_eps(s, vb);
    all = all && rep.all_pass();
    entries.push_back({{"k", k},
                       {"Hbar", s.Hbar},
                       {"bounds", bound_report_json(rep)}});
  }
  // cell-level coercivity across the Lambda lattice
  const double lmax = lambda_box_rule(cfg, vb);
  auto t = tabulate_Heff(cfg.V, make_grid(cfg.d, std::min(cfg.macro_n, 8)),
                         lmax, std::max(cfg.lambda_step, lmax / 6.0),
                         make_grid(cfg.d, cfg.micro_n), {cfg.tol, cfg.max_iter});
  auto hrep = verify_Heff_properties(t, vb);
  all = all && hrep.coercivity_pass;
  nlohmann::json out = {{"config_hash", cfg.hash},
                        {"vmin", vb.vmin},
                        {"vmax", vb.vmax},
                        {"eps_entries", entries},
                        {"cell_coercivity_pass", hrep.coercivity_pass},
                        {"cell_coercivity_worst_margin", hrep.coercivity_worst},
                        {"all_pass", all}};
  write_json(art.file("bounds.json"), out);
  manifest_extra["all_pass"] = all;
  return 0;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"stationary mean-field game homogenization toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, eps_override;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--eps", eps_override, "restrict to one eps, e.g. 1/8");
    sub->add_option("--seed", seed, "seed for random-init uniqueness probes")
        ->each([&](const std::string&) { seed_given = true; });
  };

  static const std::vector<std::string> names = {
      "solve-eps", "solve-cell", "tabulate-heff", "solve-homog",
      "reconstruct", "converge", "oracle-1d", "verify-bounds"};
  for (const auto& n : names) add_common(app.add_subcommand(n));

  std::vector<const char*> argv;
  argv.push_back("mfg-homog");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto cfg = parse_run_config(read_json(config_path));
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!eps_override.empty()) cfg.ks = {parse_eps_string(eps_override)};
    if (seed_given) {
      cfg.seed = seed;
      cfg.has_seed = true;
    }

    detail::Artifacts art;
    art.dir = cfg.output_dir;
    std::filesystem::create_directories(art.dir);

    nlohmann::json extra;
    int rc = 0;
    if (sub == "solve-eps") rc = detail::cmd_solve_eps(cfg, art, extra);
    else if (sub == "solve-cell") rc = detail::cmd_solve_cell(cfg, art, extra);
    else if (sub == "tabulate-heff") rc = detail::cmd_tabulate(cfg, art, extra);
    else if (sub == "solve-homog") rc = detail::cmd_solve_homog(cfg, art, extra);
    else if (sub == "reconstruct") rc = detail::cmd_reconstruct(cfg, art, extra);
    else if (sub == "converge") rc = detail::cmd_converge(cfg, art, extra);
    else if (sub == "oracle-1d") rc = detail::cmd_oracle_1d(cfg, art, extra);
    else if (sub == "verify-bounds") rc = detail::cmd_verify_bounds(cfg, art, extra);

    const auto dt = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    nlohmann::json manifest = {
        {"config_hash", cfg.hash},
        {"subcommand", sub},
        {"version", kVersion},
        {"artifacts", art.names},
        {"timing_ms", dt},
        {"details", extra},
    };
    write_json(art.dir / "manifest.json", manifest);
    return rc;
  } catch (const error& e) {
    std::cerr << e.what() << "\n";
    return detail::is_config_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace mfgh
