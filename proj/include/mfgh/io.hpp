#pragma once

// File formats: JSON headers/reports (nlohmann), CSV payloads at full double
// precision (scientific, 17 significant digits, bit-stable for fixtures),
// and the versioned effective-Hamiltonian table serialization. Every report
// embeds the config hash (FNV-1a 64 of the canonical config serialization);
// timestamps live only in the manifest so reports stay bit-identical across
// reruns.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfgh/cell_solver.hpp"
#include "mfgh/convergence.hpp"
#include "mfgh/eps_solver.hpp"
#include "mfgh/errors.hpp"
#include "mfgh/homog_solver.hpp"
#include "mfgh/oracle1d.hpp"
#include "mfgh/torus.hpp"

namespace mfgh {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kTableFormatVersion = 1;

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string config_hash(const nlohmann::json& config) {
  return fnv1a_hex(config.dump());
}

inline std::string fmt_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return std::string(buf);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
      : out_(path) {
    require(out_.good(), errc::bad_config, "cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
      out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << fmt_full(values[i]);
    out_ << "\n";
  }
  void row_mixed(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& j) {
  std::ofstream out(path);
  require(out.good(), errc::bad_config, "cannot open " + path.string());
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), errc::bad_config, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_config, "invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline nlohmann::json bound_report_json(const BoundReport& rep) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"bound", c.bound},
                      {"kind", c.is_upper ? "upper" : "lower"},
                      {"pass", c.pass}});
  }
  return {{"all_pass", rep.all_pass()}, {"checks", checks}};
}

// Scalar-field export: JSON header + CSV of node coordinates and values.
inline void export_fields_csv(const std::filesystem::path& path,
                              const TorusGrid& grid,
                              const std::vector<std::string>& names,
                              const std::vector<const ScalarField*>& fields) {
  std::vector<std::string> header;
  for (int a = 0; a < grid.d; ++a) header.push_back("x" + std::to_string(a + 1));
  for (const auto& n : names) header.push_back(n);
  CsvWriter csv(path, header);
  double x[3];
  std::vector<double> row(grid.d + fields.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node(i, x);
    for (int a = 0; a < grid.d; ++a) row[a] = x[a];
    for (std::size_t f = 0; f < fields.size(); ++f)
      row[grid.d + f] = (*fields[f])[i];
    csv.row(row);
  }
}

// Effective-Hamiltonian table: JSON header + CSV payload (one row per
// (x, Lambda) lattice point).
inline void save_table(const EffectiveHamiltonianTable& t,
                       const std::filesystem::path& json_path,
                       const std::filesystem::path& csv_path,
                       const std::string& cfg_hash) {
  nlohmann::json header = {
      {"format", "heff-table"},
      {"version", kTableFormatVersion},
      {"d", t.d},
      {"macro_n", t.macro.n},
      {"micro_n", t.micro.n},
      {"micro_d", t.micro.d},
      {"lambda_max", t.lambda_max},
      {"lambda_step", t.dlambda},
      {"lambda_points", t.nl},
      {"payload", csv_path.filename().string()},
      {"config_hash", cfg_hash},
  };
  write_json(json_path, header);

  std::vector<std::string> cols;
  for (int a = 0; a < t.d; ++a) cols.push_back("x" + std::to_string(a + 1));
  for (int a = 0; a < t.d; ++a) cols.push_back("lambda" + std::to_string(a + 1));
  cols.push_back("H");
  for (int a = 0; a < t.d; ++a) cols.push_back("b" + std::to_string(a + 1));
  CsvWriter csv(csv_path, cols);

  double x[3];
  int lj[3];
  std::vector<double> row(3 * t.d + 1);
  for (std::size_t xi = 0; xi < t.macro.size(); ++xi) {
    t.macro.node(xi, x);
    for (std::size_t li = 0; li < t.lambda_count(); ++li) {
      std::size_t rem = li;
      for (int a = t.d - 1; a >= 0; --a) {
        lj[a] = static_cast<int>(rem % t.nl);
        rem /= t.nl;
      }
      std::size_t c = 0;
      for (int a = 0; a < t.d; ++a) row[c++] = x[a];
      for (int a = 0; a < t.d; ++a) row[c++] = t.lambda_node(lj[a]);
      row[c++] = t.H_at(xi, li);
      for (int a = 0; a < t.d; ++a) row[c++] = t.b_at(xi, li, a);
      csv.row(row);
    }
  }
}

inline EffectiveHamiltonianTable load_table(
    const std::filesystem::path& json_path) {
  auto header = read_json(json_path);
  require(header.value("format", "") == "heff-table", errc::bad_config,
          "not an effective-Hamiltonian table file");
  require(header.value("version", -1) == kTableFormatVersion, errc::bad_config,
          "unsupported table format version");

  EffectiveHamiltonianTable t;
  t.d = header.at("d").get<int>();
  t.macro = make_grid(t.d, header.at("macro_n").get<int>());
  t.micro = make_grid(header.at("micro_d").get<int>(),
                      header.at("micro_n").get<int>());
  t.lambda_max = header.at("lambda_max").get<double>();
  t.dlambda = header.at("lambda_step").get<double>();
  t.nl = header.at("lambda_points").get<int>();
  t.H.assign(t.macro.size() * t.lambda_count(), 0.0);
  t.b.assign(t.macro.size() * t.lambda_count() * t.d, 0.0);

  auto csv_path = json_path.parent_path() /
                  header.at("payload").get<std::string>();
  std::ifstream in(csv_path);
  require(in.good(), errc::bad_config,
          "cannot open table payload " + csv_path.string());
  std::string line;
  std::getline(in, line);  // header
  std::size_t row_index = 0;
  const std::size_t expected = t.macro.size() * t.lambda_count();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    require(row_index < expected, errc::bad_config,
            "table payload has more rows than the header declares");
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      vals.push_back(std::stod(line.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    require(vals.size() == static_cast<std::size_t>(3 * t.d + 1),
            errc::bad_config, "table payload column count mismatch");
    const std::size_t xi = row_index / t.lambda_count();
    const std::size_t li = row_index % t.lambda_count();
    t.H_at(xi, li) = vals[2 * t.d];
    for (int a = 0; a < t.d; ++a)
      t.b_at(xi, li, a) = vals[2 * t.d + 1 + a];
    ++row_index;
  }
  require(row_index == expected, errc::bad_config,
          "table payload row count mismatch");
  return t;
}

inline nlohmann::json convergence_report_json(const ConvergenceReport& rep,
                                              const std::string& cfg_hash) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"k", r.k},
                    {"n", r.n},
                    {"Hbar_eps", r.Hbar_eps},
                    {"I_eps", r.I_eps},
                    {"gap_H", r.gap_H},
                    {"gap_u_sup", r.gap_u_sup},
                    {"gap_energy", r.gap_energy},
                    {"ts_gaps", r.ts_gaps},
                    {"ansatz_hj", r.ansatz_hj},
                    {"ansatz_transport", r.ansatz_transport},
                    {"ansatz_available", r.ansatz_available},
                    {"bounds", bound_report_json(r.bounds)}});
  }
  return {{"config_hash", cfg_hash},
          {"Hbar_ref", rep.Hbar_ref},
          {"I_ref", rep.I_ref},
          {"battery", rep.battery_texts},
          {"rows", rows},
          {"monotone",
           {{"gap_H", rep.H_monotone},
            {"gap_u_sup", rep.u_monotone},
            {"gap_energy", rep.energy_monotone},
            {"ansatz_hj", rep.ansatz_hj_monotone},
            {"ts_gaps", rep.ts_monotone}}}};
}

inline void write_convergence_csv(const std::filesystem::path& path,
                                  const ConvergenceReport& rep) {
  std::vector<std::string> cols = {"k",          "n",         "Hbar_eps",
                                   "gap_H",      "gap_u_sup", "gap_energy",
                                   "ansatz_hj",  "ansatz_transport"};
  for (std::size_t b = 0; b < rep.battery_texts.size(); ++b)
    cols.push_back("ts_gap_" + std::to_string(b + 1));
  CsvWriter csv(path, cols);
  for (const auto& r : rep.rows) {
    std::vector<double> row = {static_cast<double>(r.k),
                               static_cast<double>(r.n),
                               r.Hbar_eps,
                               r.gap_H,
                               r.gap_u_sup,
                               r.gap_energy,
                               r.ansatz_hj,
                               r.ansatz_transport};
    for (double g : r.ts_gaps) row.push_back(g);
    csv.row(row);
  }
}

}  // namespace mfgh
