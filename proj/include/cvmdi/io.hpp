#pragma once

// Scenario configuration files and the result CSV schema used by the CLI.
//
// Configuration is a flat sectioned key = value format:
//
//   [channel]        l_ac_km, l_bc_km, alpha_db_per_km, eps1_snu, eps2_snu
//   [modulation]     v_a_snu, v_b_snu
//   [reconciliation] beta
//   [finite]         n_total, est_fraction, eps_pe, eps_smooth, eps_pa,
//                    include_variance_intervals, iab_at_worst
//   [detector]       eta, v_el_snu, eta_halfwidth, v_el_halfwidth (optional)
//   [mode]           mode = theory | montecarlo, seed
//
// '#' and ';' start comments. Unknown sections or keys are rejected.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cvmdi/optimizer.hpp"

namespace cvmdi {

enum class RunMode { kTheory, kMonteCarlo };

struct ScenarioConfig {
  Scenario scenario;
  RunMode mode = RunMode::kTheory;
  std::uint64_t seed = 1;
};

/// Parse a configuration document. `overrides` are "section.key=value"
/// strings applied on top of the document. Throws ConfigError naming the line
/// and key at fault.
ScenarioConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config(const std::string& path,
                           const std::vector<std::string>& overrides = {});

/// Fixed decimal formatting: 12 significant digits, "nan"/"inf" spelled out.
std::string format_number(double x);

/// One evaluation in the result CSV.
struct ResultRow {
  std::string variable = "none";  ///< swept variable, or "none" for a single point
  double value = 0.0;
  double l_ac_km = 0.0;
  double l_bc_km = 0.0;
  double v_a_snu = 0.0;
  double v_b_snu = 0.0;
  double n_total = 0.0;  ///< inf for the asymptotic rate
  double beta = 0.0;
  double i_ab = 0.0;
  double chi_be_worst = 0.0;
  double delta_n = 0.0;
  double k = 0.0;
  std::string status;
  std::string worst_corner;
};

ResultRow make_row(const std::string& variable, double value, const Scenario& scenario,
                   const KeyRateReport& report);

/// Header line of the result CSV (no trailing newline).
const std::string& result_csv_header();
std::string format_row(const ResultRow& row);
void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws ConfigError on a missing/mismatched header or a ragged row.
std::vector<ResultRow> read_result_csv(std::istream& in);

}  // namespace cvmdi
