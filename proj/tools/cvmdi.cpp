// cvmdi: finite-size key rates for CV measurement-device-independent QKD.
//
// Exit codes: 0 success / positive key, 2 nonpositive key (keyrate only),
// 1 usage or configuration error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cvmdi/error.hpp"
#include "cvmdi/estimation.hpp"
#include "cvmdi/finite_size.hpp"
#include "cvmdi/io.hpp"
#include "cvmdi/optimizer.hpp"
#include "cvmdi/parallel.hpp"

namespace {

using namespace cvmdi;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoKey = 2;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Scenario configuration file")->required();
  cmd->add_option("--set", c.overrides, "Override a config entry, section.key=value");
  cmd->add_option("--seed", c.seed, "Random seed (overrides [mode] seed)");
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = load_config(c.config, c.overrides);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write output file '" + path + "'");
  return out;
}

void print_warnings(const KeyRateReport& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw Error("bad number '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw Error("empty list");
  return out;
}

// Monte Carlo mode: estimate both links from simulated data, then evaluate
// the key rate from those estimates.
KeyRateReport keyrate_from_samples(const ScenarioConfig& cfg) {
  const Scenario& s = cfg.scenario;
  const ChannelTruth truth = channel_truth(s.protocol);
  const double m = s.finite.m();
  const EstimationResult a = estimate_streaming(truth.alice.t_prime, truth.alice.sigma2,
                                                truth.alice.v_mod, m, derive_seed(cfg.seed, 0, 0));
  const EstimationResult b = estimate_streaming(truth.bob.t_prime, truth.bob.sigma2,
                                                truth.bob.v_mod, m, derive_seed(cfg.seed, 0, 1));
  return finite_key_rate(s.protocol, s.finite, to_channel_estimate(a, b), s.policy);
}

VarianceSearch variance_search(double lo, double hi, int coarse, double rel_tol) {
  VarianceSearch v;
  v.lo = lo;
  v.hi = hi;
  v.coarse_points = coarse;
  v.rel_tol = rel_tol;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-size key rates for continuous-variable MDI QKD"};
  app.require_subcommand(1);

  Common common;
  bool asymptotic = false;
  std::string out_path;

  auto* keyrate = app.add_subcommand("keyrate", "Evaluate the key rate of one scenario");
  add_common(keyrate, common);
  keyrate->add_flag("--asymptotic", asymptotic, "Ignore finite-size effects");

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate the key rate over a 1-D grid");
  add_common(sweep_cmd, common);
  std::string sweep_var = "distance_ac";
  SweepSpec spec;
  bool log_spacing = false, optimize_variance = false;
  double v_lo = 0.1, v_hi = 1e6, rel_tol = 1e-3;
  int coarse = 40;
  sweep_cmd->add_option("--out", out_path, "Output CSV")->required();
  sweep_cmd->add_option("--variable", sweep_var,
                        "distance_ac | distance_bc | variance | block_length");
  sweep_cmd->add_option("--from", spec.lo, "Lower end of the grid");
  sweep_cmd->add_option("--to", spec.hi, "Upper end of the grid");
  sweep_cmd->add_option("--points", spec.points, "Number of grid points");
  sweep_cmd->add_flag("--log", log_spacing, "Geometric spacing (default for variance/block_length)");
  sweep_cmd->add_flag("--optimize-variance", optimize_variance,
                      "Use the optimal modulation variance at every point");
  sweep_cmd->add_flag("--asymptotic", asymptotic, "Ignore finite-size effects");
  sweep_cmd->add_option("--v-lo", v_lo, "Variance search lower bound (SNU)");
  sweep_cmd->add_option("--v-hi", v_hi, "Variance search upper bound (SNU)");

  auto* optimize = app.add_subcommand("optimize", "Find the optimal modulation variance");
  add_common(optimize, common);
  std::string block_lengths;
  optimize->add_option("--out", out_path, "Output CSV")->required();
  optimize->add_option("--block-lengths", block_lengths,
                       "Comma-separated N values (default: the config's n_total)");
  optimize->add_option("--v-lo", v_lo, "Search lower bound (SNU)");
  optimize->add_option("--v-hi", v_hi, "Search upper bound (SNU)");
  optimize->add_option("--coarse", coarse, "Coarse log-grid points");
  optimize->add_option("--rel-tol", rel_tol, "Relative tolerance on the variance");
  optimize->add_flag("--asymptotic", asymptotic, "Ignore finite-size effects");

  auto* frontier = app.add_subcommand("frontier", "Positive-key boundary in (L_AC, L_BC)");
  add_common(frontier, common);
  double lbc_from = 0.0, lbc_to = 10.0, search_hi = 200.0, resolution = 0.1;
  std::size_t lbc_points = 21;
  frontier->add_option("--out", out_path, "Output CSV")->required();
  frontier->add_option("--lbc-from", lbc_from, "First L_BC (km)");
  frontier->add_option("--lbc-to", lbc_to, "Last L_BC (km)");
  frontier->add_option("--lbc-points", lbc_points, "Number of L_BC values");
  frontier->add_option("--search-hi", search_hi, "Upper distance bracket (km)");
  frontier->add_option("--resolution", resolution, "Bisection resolution (km)");
  frontier->add_flag("--optimize-variance", optimize_variance,
                     "Use the optimal modulation variance at every point");
  frontier->add_flag("--asymptotic", asymptotic, "Ignore finite-size effects");

  auto* coverage = app.add_subcommand("mc-coverage", "Monte Carlo confidence-interval coverage");
  add_common(coverage, common);
  double m_samples = 1e4;
  std::optional<double> eps_pe;
  std::size_t trials = 2000;
  std::string dump_path;
  coverage->add_option("--out", out_path, "Output CSV")->required();
  coverage->add_option("--m", m_samples, "Estimation samples per link");
  coverage->add_option("--eps-pe", eps_pe, "Failure probability (default: config eps_pe)");
  coverage->add_option("--trials", trials, "Number of trials");
  coverage->add_option("--dump-samples", dump_path, "Write the first trial's Alice-link samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  const unsigned threads = threads_from_env();
  try {
    if (keyrate->parsed()) {
      ScenarioConfig cfg = load(common);
      cfg.scenario.asymptotic = asymptotic;
      const KeyRateReport r = (cfg.mode == RunMode::kMonteCarlo && !asymptotic)
                                  ? keyrate_from_samples(cfg)
                                  : evaluate(cfg.scenario);
      print_warnings(r);
      std::cout << result_csv_header() << '\n'
                << format_row(make_row("none", NAN, cfg.scenario, r)) << '\n';
      return r.positive() ? kExitOk : kExitNoKey;
    }

    if (sweep_cmd->parsed()) {
      ScenarioConfig cfg = load(common);
      cfg.scenario.asymptotic = asymptotic;
      spec.variable = parse_sweep_variable(sweep_var);
      spec.log_spaced = log_spacing || spec.variable == SweepVariable::kVariance ||
                        spec.variable == SweepVariable::kBlockLength;
      spec.optimize_variance = optimize_variance;
      spec.variance = variance_search(v_lo, v_hi, coarse, rel_tol);
      std::ofstream out = open_out(out_path);
      const auto rows = sweep(cfg.scenario, spec, threads);
      std::vector<ResultRow> table;
      for (const auto& row : rows) {
        print_warnings(row.report);
        table.push_back(make_row(to_string(spec.variable), row.value, row.scenario, row.report));
      }
      write_result_csv(out, table);
      std::size_t positive = 0;
      for (const auto& row : rows) positive += row.report.positive() ? 1 : 0;
      std::cout << "rows=" << rows.size() << " positive=" << positive << " out=" << out_path << '\n';
      return kExitOk;
    }

    if (optimize->parsed()) {
      ScenarioConfig cfg = load(common);
      cfg.scenario.asymptotic = asymptotic;
      const std::vector<double> ns = block_lengths.empty()
                                         ? std::vector<double>{cfg.scenario.finite.n_total}
                                         : parse_list(block_lengths);
      const VarianceSearch search = variance_search(v_lo, v_hi, coarse, rel_tol);
      std::ofstream out = open_out(out_path);
      out << "n_total,l_ac_km,l_bc_km,v_star_snu,k_star,location\n";
      for (double n : ns) {
        Scenario s = cfg.scenario;
        s.finite.n_total = n;
        const OptimalModulation opt = optimal_modulation(s, search, threads);
        const std::string n_text = asymptotic ? "inf" : format_number(n);
        out << n_text << ',' << format_number(s.protocol.l_ac) << ','
            << format_number(s.protocol.l_bc) << ',' << format_number(opt.v_star) << ','
            << format_number(opt.k_star) << ',' << to_string(opt.location) << '\n';
        std::cout << "n_total=" << n_text << " v_star=" << format_number(opt.v_star)
                  << " k_star=" << format_number(opt.k_star)
                  << " location=" << to_string(opt.location) << '\n';
      }
      return kExitOk;
    }

    if (frontier->parsed()) {
      ScenarioConfig cfg = load(common);
      cfg.scenario.asymptotic = asymptotic;
      DistanceSearch search;
      search.search_hi = search_hi;
      search.resolution = resolution;
      search.optimize_variance = optimize_variance;
      SweepSpec grid_spec;
      grid_spec.lo = lbc_from;
      grid_spec.hi = lbc_to;
      grid_spec.points = lbc_points;
      std::ofstream out = open_out(out_path);
      const auto points = distance_frontier(cfg.scenario, grid_spec.values(), search, threads);
      out << "l_bc_km,max_l_ac_km\n";
      for (const auto& pt : points) {
        out << format_number(pt.l_bc) << ',' << format_number(pt.max_l_ac) << '\n';
      }
      DistanceSearch along_bc = search;
      along_bc.axis = DistanceAxis::kBobCharlie;
      Scenario at_relay = cfg.scenario;
      at_relay.protocol.l_ac = 0.0;
      const MaxDistance bc = max_distance(at_relay, along_bc);
      std::cout << "max_l_ac_at_first_l_bc=" << format_number(points.front().max_l_ac)
                << " max_l_bc_at_l_ac0=" << format_number(bc.km) << '\n';
      return kExitOk;
    }

    if (coverage->parsed()) {
      ScenarioConfig cfg = load(common);
      if (!(m_samples >= 2.0)) throw Error("--m must be >= 2");
      const auto m = static_cast<std::size_t>(m_samples);
      const ChannelTruth truth = channel_truth(cfg.scenario.protocol);
      const double eps = eps_pe.value_or(cfg.scenario.finite.eps_pe);
      if (!dump_path.empty()) {
        std::ofstream dump = open_out(dump_path);
        write_samples(dump, generate_samples(truth.alice.t_prime, truth.alice.sigma2,
                                             truth.alice.v_mod, m, derive_seed(cfg.seed, 0, 0)));
      }
      const CoverageRecord rec = coverage_experiment(truth, m, eps, trials, cfg.seed, threads);
      std::ofstream out = open_out(out_path);
      out << "parameter,true_value,coverage\n";
      for (std::size_t i = 0; i < rec.coverage.size(); ++i) {
        out << CoverageRecord::kNames[i] << ',' << format_number(rec.truth[i]) << ','
            << format_number(rec.coverage[i]) << '\n';
      }
      std::cout << "min_coverage=" << format_number(rec.min_coverage())
                << " trials=" << rec.trials << " eps_pe=" << format_number(eps) << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
