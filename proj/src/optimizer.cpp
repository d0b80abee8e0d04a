#include "cvmdi/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cvmdi/error.hpp"
#include "cvmdi/parallel.hpp"

namespace cvmdi {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Scenario with_variance(Scenario s, double v) {
  s.protocol.v_a = v;
  s.protocol.v_b = v;
  return s;
}

double safe_rate(const Scenario& s) {
  try {
    return evaluate(s).k;
  } catch (const Error&) {
    return kNegInf;
  }
}

std::string km_text(double km) {
  std::ostringstream os;
  os << km << " km";
  return os.str();
}

}  // namespace

KeyRateReport evaluate(const Scenario& s) {
  return s.asymptotic ? asymptotic_key_rate(s.protocol)
                      : finite_key_rate(s.protocol, s.finite, s.policy);
}

const char* to_string(OptimumLocation loc) noexcept {
  switch (loc) {
    case OptimumLocation::kInterior: return "interior";
    case OptimumLocation::kUpperBound: return "upper_bound";
    case OptimumLocation::kLowerBound: return "lower_bound";
  }
  return "interior";
}

OptimalModulation optimal_modulation(const Scenario& fixed, const VarianceSearch& search,
                                     unsigned threads) {
  if (!(search.lo > 0.0) || !(search.hi >= search.lo)) {
    throw DomainError("optimal_modulation: need 0 < lo <= hi");
  }
  if (!(search.rel_tol > 0.0)) throw DomainError("optimal_modulation: rel_tol must be > 0");

  OptimalModulation out;
  if (search.hi == search.lo) {
    out.v_star = search.lo;
    out.report = evaluate(with_variance(fixed, out.v_star));
    out.k_star = out.report.k;
    return out;
  }

  const int points = std::max(search.coarse_points, 3);
  const double log_lo = std::log(search.lo), log_hi = std::log(search.hi);
  std::vector<double> grid(points), rate(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = log_lo + (log_hi - log_lo) * i / (points - 1);
  }
  parallel_for(points, threads, [&](std::size_t i) {
    rate[i] = safe_rate(with_variance(fixed, std::exp(grid[i])));
  });
  const auto best = static_cast<int>(std::max_element(rate.begin(), rate.end()) - rate.begin());

  double best_log = grid[best];
  double best_rate = rate[best];
  auto consider = [&](double log_v, double k) {
    if (k > best_rate) {
      best_rate = k;
      best_log = log_v;
    }
  };

  // Golden-section maximisation in log v on the neighbouring grid cells.
  double a = grid[std::max(best - 1, 0)];
  double b = grid[std::min(best + 1, points - 1)];
  const double tol = std::log1p(search.rel_tol);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = safe_rate(with_variance(fixed, std::exp(c)));
  double fd = safe_rate(with_variance(fixed, std::exp(d)));
  consider(c, fc);
  consider(d, fd);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = safe_rate(with_variance(fixed, std::exp(c)));
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = safe_rate(with_variance(fixed, std::exp(d)));
      consider(d, fd);
    }
  }

  out.v_star = std::exp(best_log);
  if (log_hi - best_log <= tol) {
    out.location = OptimumLocation::kUpperBound;
  } else if (best_log - log_lo <= tol) {
    out.location = OptimumLocation::kLowerBound;
  }
  out.report = evaluate(with_variance(fixed, out.v_star));
  out.k_star = out.report.k;
  return out;
}

double rate_at_distance(const Scenario& fixed, const DistanceSearch& search, double km) {
  Scenario s = fixed;
  (search.axis == DistanceAxis::kAliceCharlie ? s.protocol.l_ac : s.protocol.l_bc) = km;
  if (!search.optimize_variance) return safe_rate(s);
  try {
    return optimal_modulation(s, search.variance).k_star;
  } catch (const Error&) {
    return kNegInf;
  }
}

MaxDistance max_distance(const Scenario& fixed, const DistanceSearch& search) {
  if (!(search.step > 0.0) || !(search.resolution > 0.0) || !(search.search_hi > 0.0)) {
    throw DomainError("max_distance: step, resolution and search_hi must be > 0");
  }
  MaxDistance out;
  double prev_km = 0.0;
  double prev_k = rate_at_distance(fixed, search, 0.0);
  if (!(prev_k > 0.0)) {
    out.diagnostic = "no positive key rate at zero distance";
    return out;
  }
  out.positive_at_zero = true;

  double lo = 0.0, hi = -1.0;
  while (prev_km < search.search_hi) {
    const double km = std::min(prev_km + search.step, search.search_hi);
    const double k = rate_at_distance(fixed, search, km);
    if (!(k > 0.0)) {
      lo = prev_km;
      hi = km;
      break;
    }
    if (!(k < prev_k)) {
      std::ostringstream os;
      os.precision(12);
      os << "max_distance: key rate not decreasing between " << km_text(prev_km) << " (k=" << prev_k
         << ") and " << km_text(km) << " (k=" << k << ")";
      throw Error(os.str());
    }
    prev_km = km;
    prev_k = k;
  }
  if (hi < 0.0) {
    out.km = search.search_hi;
    out.reached_search_limit = true;
    out.diagnostic = "key rate still positive at the search limit";
    return out;
  }
  while (hi - lo > search.resolution) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at_distance(fixed, search, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.km = 0.5 * (lo + hi);
  return out;
}

std::vector<FrontierPoint> distance_frontier(const Scenario& fixed,
                                             const std::vector<double>& l_bc_grid,
                                             const DistanceSearch& search, unsigned threads) {
  if (l_bc_grid.empty()) throw DomainError("distance_frontier: empty L_BC grid");
  DistanceSearch along_ac = search;
  along_ac.axis = DistanceAxis::kAliceCharlie;
  std::vector<FrontierPoint> out(l_bc_grid.size());
  parallel_for(l_bc_grid.size(), threads, [&](std::size_t i) {
    Scenario s = fixed;
    s.protocol.l_bc = l_bc_grid[i];
    out[i] = {l_bc_grid[i], max_distance(s, along_ac).km};
  });
  std::vector<FrontierPoint> sorted = out;
  std::sort(sorted.begin(), sorted.end(),
            [](const FrontierPoint& x, const FrontierPoint& y) { return x.l_bc < y.l_bc; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].max_l_ac > sorted[i - 1].max_l_ac + search.resolution) {
      std::ostringstream os;
      os << "distance_frontier: max L_AC increases from " << km_text(sorted[i - 1].max_l_ac)
         << " at L_BC=" << km_text(sorted[i - 1].l_bc) << " to " << km_text(sorted[i].max_l_ac)
         << " at L_BC=" << km_text(sorted[i].l_bc);
      throw Error(os.str());
    }
  }
  return out;
}

const char* to_string(SweepVariable v) noexcept {
  switch (v) {
    case SweepVariable::kDistanceAc: return "distance_ac";
    case SweepVariable::kDistanceBc: return "distance_bc";
    case SweepVariable::kVariance: return "variance";
    case SweepVariable::kBlockLength: return "block_length";
  }
  return "distance_ac";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  for (auto v : {SweepVariable::kDistanceAc, SweepVariable::kDistanceBc, SweepVariable::kVariance,
                 SweepVariable::kBlockLength}) {
    if (name == to_string(v)) return v;
  }
  throw DomainError("unknown sweep variable '" + name +
                    "' (expected distance_ac, distance_bc, variance or block_length)");
}

void SweepSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw DomainError("SweepSpec: need finite lo <= hi");
  }
  if (hi > lo && points < 2) throw DomainError("SweepSpec: need at least 2 points for a range");
  if (points < 1) throw DomainError("SweepSpec: need at least 1 point");
  if (log_spaced && !(lo > 0.0)) throw DomainError("SweepSpec: log spacing needs lo > 0");
}

std::vector<double> SweepSpec::values() const {
  validate();
  if (hi == lo || points == 1) return {lo};
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    out[i] = log_spaced ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                        : lo + f * (hi - lo);
  }
  out.back() = hi;
  return out;
}

Scenario with_value(Scenario s, SweepVariable variable, double value) {
  switch (variable) {
    case SweepVariable::kDistanceAc: s.protocol.l_ac = value; break;
    case SweepVariable::kDistanceBc: s.protocol.l_bc = value; break;
    case SweepVariable::kVariance:
      s.protocol.v_a = value;
      s.protocol.v_b = value;
      break;
    case SweepVariable::kBlockLength: s.finite.n_total = value; break;
  }
  return s;
}

std::vector<SweepRow> sweep(const Scenario& fixed, const SweepSpec& spec, unsigned threads) {
  const std::vector<double> values = spec.values();
  if (spec.optimize_variance && spec.variable == SweepVariable::kVariance) {
    throw DomainError("sweep: cannot optimise the variance while sweeping it");
  }
  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    row.scenario = with_value(fixed, spec.variable, values[i]);
    if (spec.optimize_variance) {
      const OptimalModulation opt = optimal_modulation(row.scenario, spec.variance);
      row.scenario = with_variance(row.scenario, opt.v_star);
      row.report = opt.report;
    } else {
      row.report = evaluate(row.scenario);
    }
  });
  return rows;
}

}  // namespace cvmdi
