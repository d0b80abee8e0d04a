// Acceptance suite: one PASS/FAIL line per headline criterion, followed by
// indented detail lines. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cvmdi/error.hpp"
#include "cvmdi/estimation.hpp"
#include "cvmdi/finite_size.hpp"
#include "cvmdi/gaussian.hpp"
#include "cvmdi/optimizer.hpp"
#include "cvmdi/parallel.hpp"

using namespace cvmdi;

namespace {

// Tolerances and budgets.
constexpr double kDistanceTolKm = 3.0;
constexpr double kIdealBudgetS = 5.0;
constexpr double kOptimisedBudgetS = 60.0;
constexpr double kMonteCarloBudgetS = 120.0;
constexpr double kDeltaTarget = 0.041016;
constexpr double kDeltaTol = 1e-6;
constexpr double kZTarget = 6.4666;
constexpr double kZTol = 1e-3;
constexpr double kLimitRelTol = 0.01;
constexpr double kCoverageLo = 0.93;
constexpr double kCoverageHi = 0.97;
// Golden-section tolerance for the v_star trend; neighbouring block lengths
// differ by ~0.2% at 1e9 vs 1e10, so the default 1e-3 is too coarse.
constexpr double kTrendRelTol = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Suite {
  int failed = 0;

  void report(bool ok, const std::string& name, const std::vector<std::string>& details) {
    std::printf("%s  %s\n", ok ? "PASS" : "FAIL", name.c_str());
    for (const auto& d : details) std::printf("        %s\n", d.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }

  // Runs body and turns an escaped exception into a failed criterion.
  void run(const std::string& name, const std::function<bool(std::vector<std::string>&)>& body) {
    std::vector<std::string> details;
    bool ok = false;
    try {
      ok = body(details);
    } catch (const std::exception& e) {
      details.push_back(std::string("exception: ") + e.what());
    }
    report(ok, name, details);
  }
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

std::string mark(bool ok) { return ok ? "[ok]   " : "[FAIL] "; }

Scenario asymmetric(double n_total, double beta = 1.0) {
  Scenario s;
  s.protocol.v_a = s.protocol.v_b = 1e5;
  s.protocol.eps1 = s.protocol.eps2 = 0.002;
  s.protocol.l_ac = 0.0;
  s.protocol.l_bc = 0.0;
  s.protocol.beta = beta;
  s.finite.n_total = n_total;
  return s;
}

bool distance_check(std::vector<std::string>& details, const Scenario& s, const DistanceSearch& search,
                    double target, double budget_s, const char* label) {
  const auto t0 = Clock::now();
  const MaxDistance d = max_distance(s, search);
  const double elapsed = seconds_since(t0);
  const bool in_band = std::abs(d.km - target) <= kDistanceTolKm;
  const bool fast = elapsed < budget_s;
  details.push_back(mark(in_band && fast) + label +
                    fmt(": %.2f km (target %.0f +/- %.0f), %.2f s", d.km, target, kDistanceTolKm, elapsed) +
                    fmt(" (budget %.0f s)", budget_s));
  return in_band && fast;
}

TwoModeCov channel_cov(double va, double t, double sigma2) {
  return {va + 1.0, t * t * va + sigma2, t * std::sqrt(va * va + 2.0 * va)};
}

}  // namespace

int main() {
  Suite suite;
  const unsigned threads = threads_from_env();

  suite.run("Max distance, beta=1, V=1e5, eps=0.002, L_BC=0", [](auto& details) {
    DistanceSearch search;
    const bool a = distance_check(details, asymmetric(1e6), search, 32.0, kIdealBudgetS, "N=1e6");
    const bool b = distance_check(details, asymmetric(1e10), search, 86.0, kIdealBudgetS, "N=1e10");
    return a && b;
  });

  suite.run("Max distance, beta=0.969, optimal modulation variance", [](auto& details) {
    DistanceSearch search;
    search.optimize_variance = true;
    const bool a =
        distance_check(details, asymmetric(1e6, 0.969), search, 23.0, kOptimisedBudgetS, "N=1e6");
    const bool b =
        distance_check(details, asymmetric(1e10, 0.969), search, 75.0, kOptimisedBudgetS, "N=1e10");
    return a && b;
  });

  suite.run("Frontier, N=1e10: max L_BC at L_AC=0 < 7 km, max L_AC at L_BC=0 > 85 km",
            [threads](auto& details) {
              const Scenario s = asymmetric(1e10);
              const auto frontier = distance_frontier(s, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0},
                                                      DistanceSearch{}, threads);
              DistanceSearch along_bc;
              along_bc.axis = DistanceAxis::kBobCharlie;
              const double max_bc = max_distance(s, along_bc).km;
              const double max_ac = frontier.front().max_l_ac;
              const bool bc_ok = max_bc < 7.0;
              const bool ac_ok = max_ac > 85.0;
              details.push_back(mark(bc_ok) + fmt("max L_BC at L_AC=0: %.2f km", max_bc));
              details.push_back(mark(ac_ok) + fmt("max L_AC at L_BC=0: %.2f km", max_ac));
              std::string curve = "frontier (L_BC: max L_AC):";
              for (const auto& pt : frontier) curve += fmt(" %.0f:%.1f", pt.l_bc, pt.max_l_ac);
              details.push_back(curve);
              return bc_ok && ac_ok;
            });

  suite.run("Practical detector, eta=0.96, v_el=0.015, beta=1, N=1e10", [](auto& details) {
    Scenario s = asymmetric(1e10);
    s.protocol.detector = DetectorModel{0.96, 0.015};
    return distance_check(details, s, DistanceSearch{}, 17.0, kOptimisedBudgetS, "max distance");
  });

  suite.run("Optimal variance: decreasing in N at beta=0.969, boundary flag at beta=1",
            [threads](auto& details) {
              VarianceSearch search;
              search.rel_tol = kTrendRelTol;
              bool decreasing = true;
              double prev = INFINITY;
              std::string trend = "v_star at L_AC=20 km:";
              for (double n : {1e6, 1e7, 1e8, 1e9, 1e10}) {
                Scenario s = asymmetric(n, 0.969);
                s.protocol.l_ac = 20.0;
                const auto opt = optimal_modulation(s, search, threads);
                decreasing = decreasing && opt.v_star < prev &&
                             opt.location == OptimumLocation::kInterior;
                prev = opt.v_star;
                trend += fmt(" N=%.0e:%.4f", n, opt.v_star);
              }
              details.push_back(mark(decreasing) + trend);

              bool flagged = true;
              for (double n : {1e6, 1e10}) {
                Scenario s = asymmetric(n);
                s.protocol.l_ac = 20.0;
                const auto opt = optimal_modulation(s, VarianceSearch{}, threads);
                flagged = flagged && opt.unbounded();
                details.push_back(mark(opt.unbounded()) +
                                  fmt("beta=1, N=%.0e: v_star=%.4g, ", n, opt.v_star) +
                                  to_string(opt.location));
              }
              return decreasing && flagged;
            });

  suite.run("Property suite", [](auto& details) {
    bool all = true;

    const double delta = delta_n(1e6, 1e-10, 1e-10);
    const bool delta_ok = std::abs(delta - kDeltaTarget) <= kDeltaTol;
    details.push_back(mark(delta_ok) + fmt("Delta(n=1e6) = %.10f (target %.6f +/- %.0e)", delta,
                                           kDeltaTarget, kDeltaTol));
    all = all && delta_ok;

    const double z = z_quantile(1e-10);
    const bool z_ok = std::abs(z - kZTarget) <= kZTol;
    details.push_back(mark(z_ok) + fmt("z_quantile(1e-10) = %.6f (target %.4f +/- %.0e)", z, kZTarget, kZTol));
    all = all && z_ok;

    // Sign checks on the eavesdropper information at fixed V_A.
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> log_va(0.0, 5.0), trans(0.01, 1.0), noise(0.0, 0.5);
    const double h = 1e-5;
    int t_ok = 0, s_ok = 0;
    const int points = 50;
    for (int i = 0; i < points; ++i) {
      const double va = std::pow(10.0, log_va(rng));
      const double big_t = trans(rng);
      const double t = std::sqrt(big_t);
      const double sigma2 = 1.0 + big_t * noise(rng);
      const double t_hi = std::min(t + h, 1.0);
      const double s_lo = std::max(sigma2 - h, 1.0);
      const double d_t = holevo_bound(channel_cov(va, t_hi, sigma2)) -
                         holevo_bound(channel_cov(va, t - h, sigma2));
      const double d_s = holevo_bound(channel_cov(va, t, sigma2 + h)) -
                         holevo_bound(channel_cov(va, t, s_lo));
      t_ok += d_t < 0.0;
      s_ok += d_s > 0.0;
    }
    details.push_back(mark(s_ok == points) +
                      fmt("dS/dsigma^2 > 0 at %.0f of %.0f random points", s_ok, points));
    details.push_back(mark(t_ok == points) +
                      fmt("dS/dt < 0 at %.0f of %.0f random points", t_ok, points));
    all = all && s_ok == points && t_ok == points;

    int grid = 0, grid_ok = 0, positive = 0, raw_ok = 0;
    for (double l_ac : {5.0, 15.0, 25.0, 40.0, 60.0}) {
      for (double l_bc : {0.0, 1.0}) {
        for (double beta : {1.0, 0.969}) {
          Scenario s = asymmetric(1e8, beta);
          s.protocol.l_ac = l_ac;
          s.protocol.l_bc = l_bc;
          if (beta < 1.0) s.protocol.v_a = s.protocol.v_b = 30.0;
          const double asym = asymptotic_key_rate(s.protocol).k;
          const double fin = finite_key_rate(s.protocol, s.finite).k;
          ++grid;
          grid_ok += std::max(fin, 0.0) <= std::max(asym, 0.0);
          if (asym > 0.0) {
            ++positive;
            raw_ok += fin <= asym;
          }
        }
      }
    }
    const bool grid_pass = grid_ok == grid && raw_ok == positive;
    details.push_back(mark(grid_pass) +
                      fmt("finite k <= asymptotic k: %.0f of %.0f scenarios (extractable key); "
                          "raw k on the %.0f with positive asymptote: %.0f",
                          grid_ok, grid, positive, raw_ok));
    all = all && grid_pass;

    Scenario limit = asymmetric(1e14);
    limit.protocol.l_ac = 20.0;
    const auto fin = finite_key_rate(limit.protocol, limit.finite);
    const double asym = asymptotic_key_rate(limit.protocol).k;
    const double rel = std::abs(fin.k - asym) / std::abs(asym);
    const double rel_norm = std::abs(fin.k / fin.key_fraction - asym) / std::abs(asym);
    const bool limit_ok = rel <= kLimitRelTol;
    details.push_back(mark(limit_ok) +
                      fmt("N=1e14 at 20 km: k=%.6g vs asymptotic %.6g, rel diff %.4f (tol %.2f)", fin.k,
                          asym, rel, kLimitRelTol));
    details.push_back(fmt("        bracket normalised by N/n: rel diff %.2e", rel_norm));
    all = all && limit_ok;
    return all;
  });

  suite.run("Monte Carlo coverage, eps_PE=0.05, m=1e4, 2000 trials; slope normality at 1%",
            [threads](auto& details) {
              const auto t0 = Clock::now();
              ProtocolParams p;
              p.l_ac = 20.0;
              p.l_bc = 2.0;
              p.v_a = p.v_b = 40.0;
              const ChannelTruth truth = channel_truth(p);
              const auto rec = coverage_experiment(truth, 10000, 0.05, 2000, 1, threads);
              bool cov_ok = true;
              std::string line = "coverage:";
              for (std::size_t k = 0; k < rec.coverage.size(); ++k) {
                cov_ok = cov_ok && rec.coverage[k] >= kCoverageLo && rec.coverage[k] <= kCoverageHi;
                line += std::string(" ") + CoverageRecord::kNames[k] + fmt("=%.4f", rec.coverage[k]);
              }
              details.push_back(mark(cov_ok) + line + fmt(" (band [%.2f, %.2f])", kCoverageLo, kCoverageHi));

              const auto z = slope_z_scores(truth.alice, 10000, 2000, 2, threads);
              const double ks = ks_statistic_normal(z);
              const double crit = ks_critical_1pct(z.size());
              const bool ks_ok = ks < crit;
              details.push_back(mark(ks_ok) + fmt("KS distance %.4f (1%% critical %.4f)", ks, crit));

              const double elapsed = seconds_since(t0);
              const bool fast = elapsed < kMonteCarloBudgetS;
              details.push_back(mark(fast) + fmt("runtime %.1f s (budget %.0f s)", elapsed, kMonteCarloBudgetS));
              return cov_ok && ks_ok && fast;
            });

  std::printf("%d criteria failed\n", suite.failed);
  return suite.failed == 0 ? 0 : 1;
}
