#pragma once

// One-dimensional searches over a scenario: optimal modulation variance,
// maximal secure distance, the (L_AC, L_BC) frontier, and plain sweeps.

#include <cstddef>
#include <string>
#include <vector>

#include "cvmdi/finite_size.hpp"
#include "cvmdi/protocol.hpp"

namespace cvmdi {

/// A fully specified evaluation point.
struct Scenario {
  ProtocolParams protocol;
  FiniteSizeParams finite;
  EstimationPolicy policy;
  bool asymptotic = false;
};

KeyRateReport evaluate(const Scenario& s);

struct VarianceSearch {
  double lo = 0.1;
  double hi = 1e6;
  int coarse_points = 40;
  double rel_tol = 1e-3;
};

enum class OptimumLocation { kInterior, kUpperBound, kLowerBound };
const char* to_string(OptimumLocation loc) noexcept;

struct OptimalModulation {
  double v_star = 0.0;
  double k_star = 0.0;
  OptimumLocation location = OptimumLocation::kInterior;
  KeyRateReport report;

  bool unbounded() const noexcept { return location == OptimumLocation::kUpperBound; }
};

/// Maximise k over V_A = V_B = v in [lo, hi]: log-spaced coarse scan, then
/// golden-section refinement around the best grid point. An optimum within
/// rel_tol of an end of the range is reported with that bound as location.
OptimalModulation optimal_modulation(const Scenario& fixed, const VarianceSearch& search = {},
                                     unsigned threads = 1);

enum class DistanceAxis { kAliceCharlie, kBobCharlie };

struct DistanceSearch {
  DistanceAxis axis = DistanceAxis::kAliceCharlie;
  double search_hi = 200.0;  ///< km
  double step = 1.0;         ///< km between monotonicity samples
  double resolution = 0.1;   ///< km, final bisection bracket width
  bool optimize_variance = false;
  VarianceSearch variance;
};

struct MaxDistance {
  double km = 0.0;
  bool positive_at_zero = false;
  bool reached_search_limit = false;
  std::string diagnostic;
};

/// Key rate at distance `km` along the search axis (re-optimising the
/// modulation variance when requested). Evaluation failures count as -inf.
double rate_at_distance(const Scenario& fixed, const DistanceSearch& search, double km);

/// Largest distance with k > 0. Samples k every `step` km to check it is
/// strictly decreasing while positive (throws Error otherwise), then bisects
/// the sign change to `resolution`.
MaxDistance max_distance(const Scenario& fixed, const DistanceSearch& search = {});

struct FrontierPoint {
  double l_bc = 0.0;
  double max_l_ac = 0.0;
};

/// max_distance on the Alice-Charlie axis for each Bob-Charlie length in
/// `l_bc_grid`. Throws Error if the result increases with L_BC by more than
/// the search resolution.
std::vector<FrontierPoint> distance_frontier(const Scenario& fixed,
                                             const std::vector<double>& l_bc_grid,
                                             const DistanceSearch& search = {},
                                             unsigned threads = 1);

enum class SweepVariable { kDistanceAc, kDistanceBc, kVariance, kBlockLength };
const char* to_string(SweepVariable v) noexcept;
SweepVariable parse_sweep_variable(const std::string& name);

struct SweepSpec {
  SweepVariable variable = SweepVariable::kDistanceAc;
  double lo = 0.0;
  double hi = 100.0;
  std::size_t points = 101;
  /// Geometric spacing; the default for variance and block-length sweeps.
  bool log_spaced = false;
  bool optimize_variance = false;
  VarianceSearch variance;

  void validate() const;
  std::vector<double> values() const;
};

struct SweepRow {
  double value = 0.0;
  Scenario scenario;  ///< point actually evaluated (with the optimal v if searched)
  KeyRateReport report;
};

/// One evaluation per grid value, fanned out over `threads`, returned in grid order.
std::vector<SweepRow> sweep(const Scenario& fixed, const SweepSpec& spec, unsigned threads = 1);

/// Copy of `s` with the swept variable set to `value`.
Scenario with_value(Scenario s, SweepVariable variable, double value);

}  // namespace cvmdi
