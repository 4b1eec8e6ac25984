#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "mfgh/cli.hpp"

using namespace mfgh;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("mfgh-test-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  auto p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

nlohmann::json base_config() {
  return {
      {"dimension", 1},
      {"P", {1.0}},
      {"potential",
       {{"kind", "expression"}, {"d", 1}, {"terms", {"0.5*cos(2*pi*y1)"}}}},
      {"eps", {"1/4", "1/8"}},
      {"grids", {{"macro_n", 32}, {"micro_n", 64}, {"points_per_eps", 16}}},
      {"solver", {{"tol", 1e-10}, {"max_iter", 4000}}},
  };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("eps string parsing") {
  REQUIRE(parse_eps_string("1/4") == 4);
  REQUIRE(parse_eps_string("1/32") == 32);
  REQUIRE_THROWS_AS(parse_eps_string("0.25"), error);
  REQUIRE_THROWS_AS(parse_eps_string("2/4"), error);
  REQUIRE_THROWS_AS(parse_eps_string("1/"), error);
  REQUIRE_THROWS_AS(parse_eps_string("1/0"), error);
}

TEST_CASE("solve-eps subcommand: artifacts and exit code 0") {
  auto dir = temp_dir("solve-eps");
  auto cfgp = write_config(dir, base_config());
  int rc = run_cli({"solve-eps", "--config", cfgp.string(), "--out",
                    (dir / "out").string()});
  REQUIRE(rc == 0);
  REQUIRE(fs::exists(dir / "out" / "manifest.json"));
  REQUIRE(fs::exists(dir / "out" / "eps-1_4.json"));
  REQUIRE(fs::exists(dir / "out" / "eps-1_4.csv"));
  REQUIRE(fs::exists(dir / "out" / "eps-1_8.json"));

  auto j = read_json(dir / "out" / "eps-1_4.json");
  REQUIRE(j["converged"].get<bool>());
  REQUIRE(j["bounds"]["all_pass"].get<bool>());
  REQUIRE(j["config_hash"].get<std::string>() ==
          read_json(dir / "out" / "manifest.json")["config_hash"]);
}

TEST_CASE("incommensurate explicit grid exits with code 2") {
  auto dir = temp_dir("incomm");
  auto cfg = base_config();
  cfg["eps"] = {"1/7"};
  cfg["grids"]["eps_n"] = 64;
  auto cfgp = write_config(dir, cfg);
  int rc = run_cli({"solve-eps", "--config", cfgp.string(), "--out",
                    (dir / "out").string()});
  REQUIRE(rc == 2);
}

TEST_CASE("bad config and bad arguments exit with code 2") {
  auto dir = temp_dir("badcfg");
  auto cfg = base_config();
  cfg["potential"]["terms"] = {"y1"};  // periodicity violation
  auto cfgp = write_config(dir, cfg);
  REQUIRE(run_cli({"solve-eps", "--config", cfgp.string()}) == 2);

  REQUIRE(run_cli({"no-such-command", "--config", cfgp.string()}) == 2);
  REQUIRE(run_cli({"solve-eps"}) == 2);  // missing --config
  REQUIRE(run_cli({"solve-eps", "--config", (dir / "missing.json").string()}) == 2);
}

TEST_CASE("determinism: identical config + seed give bit-identical reports") {
  auto dir = temp_dir("determinism");
  auto cfg = base_config();
  cfg["eps"] = {"1/4"};
  auto cfgp = write_config(dir, cfg);
  REQUIRE(run_cli({"solve-eps", "--config", cfgp.string(), "--out",
                   (dir / "a").string(), "--seed", "7"}) == 0);
  REQUIRE(run_cli({"solve-eps", "--config", cfgp.string(), "--out",
                   (dir / "b").string(), "--seed", "7"}) == 0);
  REQUIRE(slurp(dir / "a" / "eps-1_4.json") == slurp(dir / "b" / "eps-1_4.json"));
  REQUIRE(slurp(dir / "a" / "eps-1_4.csv") == slurp(dir / "b" / "eps-1_4.csv"));
}

TEST_CASE("oracle-1d emits fixtures consumed downstream") {
  auto dir = temp_dir("oracle");
  auto cfgp = write_config(dir, base_config());
  REQUIRE(run_cli({"oracle-1d", "--config", cfgp.string(), "--out",
                   (dir / "out").string()}) == 0);
  auto j = read_json(dir / "out" / "oracle-limit.json");
  REQUIRE(j["Hbar"].get<double>() == Catch::Approx(0.5313690578300152).margin(1e-9));
  REQUIRE(fs::exists(dir / "out" / "oracle-eps-1_4.csv"));
  REQUIRE(fs::exists(dir / "out" / "oracle-limit-u0.csv"));
}

TEST_CASE("solve-cell, tabulate-heff, homog, reconstruct, converge, verify-bounds") {
  auto dir = temp_dir("pipeline");
  auto cfg = base_config();
  cfg["cell"] = {{"x", {0.0}}, {"lambda", {1.0}}};
  cfg["lambda_box"] = {{"max", 2.5}, {"step", 0.5}};
  cfg["grids"]["macro_n"] = 16;
  cfg["grids"]["micro_n"] = 64;
  auto cfgp = write_config(dir, cfg);

  SECTION("solve-cell") {
    REQUIRE(run_cli({"solve-cell", "--config", cfgp.string(), "--out",
                     (dir / "cell").string()}) == 0);
    auto j = read_json(dir / "cell" / "cell.json");
    REQUIRE(j["Htilde"].get<double>() ==
            Catch::Approx(0.5313690578300152).margin(1e-8));
    REQUIRE(j["current_method_gap"].get<double>() < 1e-8);
  }
  SECTION("tabulate-heff") {
    REQUIRE(run_cli({"tabulate-heff", "--config", cfgp.string(), "--out",
                     (dir / "tab").string()}) == 0);
    auto t = load_table(dir / "tab" / "heff-table.json");
    REQUIRE(t.nl >= 5);
    auto props = read_json(dir / "tab" / "heff-properties.json");
    REQUIRE(props["coercivity_pass"].get<bool>());
    REQUIRE(props["min_hessian_eig"].get<double>() > 0.0);
    // round trip: stored lattice point evaluates exactly
    double x = 0.0, L = t.lambda_node(2);
    auto [H, b] = eval_Heff(t, &x, &L);
    REQUIRE(H == Catch::Approx(t.H_at(0, 2)).margin(1e-12));
  }
  SECTION("solve-homog + reconstruct") {
    REQUIRE(run_cli({"solve-homog", "--config", cfgp.string(), "--out",
                     (dir / "homog").string(), "--seed", "3"}) == 0);
    auto j = read_json(dir / "homog" / "homog.json");
    REQUIRE(j["converged"].get<bool>());
    REQUIRE(j["uniqueness"]["u_gap_sup"].get<double>() < 1e-7);

    REQUIRE(run_cli({"reconstruct", "--config", cfgp.string(), "--out",
                     (dir / "recon").string()}) == 0);
    auto r = read_json(dir / "recon" / "two-scale.json");
    REQUIRE(r["energy_identity_rel"].get<double>() <= 1e-8);
  }
  SECTION("converge") {
    REQUIRE(run_cli({"converge", "--config", cfgp.string(), "--out",
                     (dir / "conv").string()}) == 0);
    auto r = read_json(dir / "conv" / "report.json");
    REQUIRE(r["rows"].size() == 2);
    REQUIRE(fs::exists(dir / "conv" / "report.csv"));
  }
  SECTION("verify-bounds") {
    REQUIRE(run_cli({"verify-bounds", "--config", cfgp.string(), "--out",
                     (dir / "vb").string()}) == 0);
    auto r = read_json(dir / "vb" / "bounds.json");
    REQUIRE(r["all_pass"].get<bool>());
  }
}

TEST_CASE("converge with the zero potential: all gaps vanish, exit 0") {
  auto dir = temp_dir("conv-zero");
  auto cfg = base_config();
  cfg["potential"]["terms"] = {"0"};
  cfg["grids"]["macro_n"] = 32;
  cfg["grids"]["micro_n"] = 32;
  auto cfgp = write_config(dir, cfg);
  REQUIRE(run_cli({"converge", "--config", cfgp.string(), "--out",
                   (dir / "out").string()}) == 0);
  auto r = read_json(dir / "out" / "report.json");
  for (const auto& row : r["rows"]) {
    REQUIRE(row["gap_H"].get<double>() <= 1e-10);
    REQUIRE(row["gap_u_sup"].get<double>() <= 1e-10);
    REQUIRE(row["gap_energy"].get<double>() <= 1e-10);
    REQUIRE(row["ansatz_hj"].get<double>() <= 1e-10);
    for (const auto& g : row["ts_gaps"]) REQUIRE(g.get<double>() <= 1e-10);
  }
}

TEST_CASE("--eps filter restricts the run") {
  auto dir = temp_dir("filter");
  auto cfgp = write_config(dir, base_config());
  REQUIRE(run_cli({"solve-eps", "--config", cfgp.string(), "--out",
                   (dir / "out").string(), "--eps", "1/8"}) == 0);
  REQUIRE(fs::exists(dir / "out" / "eps-1_8.json"));
  REQUIRE_FALSE(fs::exists(dir / "out" / "eps-1_4.json"));
}
