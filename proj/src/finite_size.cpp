#include "cvmdi/finite_size.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "cvmdi/error.hpp"

namespace cvmdi {
namespace {

constexpr double kMinAmplitude = 1e-12;
constexpr double kMinVariance = 1e-12;

struct CornerPoint {
  double t1p, t2p, s1p2, s2p2, va, vb;
  std::optional<DetectorModel> detector;
};

TwoModeCov covariance_at(const CornerPoint& pt) {
  if (!pt.detector) {
    return estimate_covariance(pt.t1p, pt.t2p, pt.s1p2, pt.s2p2, pt.va, pt.vb);
  }
  const double t1 = pt.t1p * pt.t1p;
  const double t2 = pt.t2p * pt.t2p;
  const LinkPair links{t1, t2, (pt.s1p2 - 1.0) / t1, (pt.s2p2 - 1.0) / t2};
  return one_way_two_mode_cov(pt.va, equivalent_one_way(links, pt.vb, pt.detector));
}

// Map clamped estimator centres back to link parameters.
LinkPair links_from_estimate(const ChannelEstimate& est) {
  const double t1p = std::clamp(est.t1p, kMinAmplitude, 1.0);
  const double t2p = std::clamp(est.t2p, kMinAmplitude, 1.0);
  const double t1 = t1p * t1p, t2 = t2p * t2p;
  return {t1, t2, (std::max(est.s1p2, 1.0) - 1.0) / t1, (std::max(est.s2p2, 1.0) - 1.0) / t2};
}

KeyRateReport assemble(double beta, double i_ab, const WorstCase& worst, double delta,
                       double key_fraction) {
  KeyRateReport r;
  r.i_ab = i_ab;
  r.chi_be_worst = worst.holevo;
  r.delta_n = delta;
  r.key_fraction = key_fraction;
  r.k = key_fraction * (beta * i_ab - worst.holevo - delta);
  r.worst_corner = worst.corner;
  r.status = r.k > 0.0 ? KeyStatus::kPositive : KeyStatus::kNonpositive;
  r.warnings = worst.warnings;
  return r;
}

KeyRateReport finite_rate_from(const ProtocolParams& p, const FiniteSizeParams& fs,
                               const ChannelEstimate& central, double i_ab_central,
                               const EstimationPolicy& policy) {
  const ChannelEstimate est = confidence_deltas(central, fs.m(), fs.eps_pe);
  WorstCaseOptions options;
  options.variances_estimated = policy.include_variance_intervals;
  options.detector = p.detector;
  options.eta_halfwidth = policy.eta_halfwidth;
  options.v_el_halfwidth = policy.v_el_halfwidth;
  const WorstCase worst = worst_case_cov(est, options);
  const double i_ab = policy.iab_at_worst ? mutual_information(worst.cov) : i_ab_central;
  return assemble(p.beta, i_ab, worst, delta_n(fs), fs.n() / fs.n_total);
}

}  // namespace

void FiniteSizeParams::validate() const {
  if (!(n_total >= 2.0) || !std::isfinite(n_total)) {
    throw DomainError("FiniteSizeParams.n_total must be finite and >= 2");
  }
  if (!(est_fraction > 0.0 && est_fraction < 1.0)) {
    throw DomainError("FiniteSizeParams.est_fraction must lie in (0, 1)");
  }
  for (const auto& [name, eps] : {std::pair{"eps_pe", eps_pe}, std::pair{"eps_smooth", eps_smooth},
                                  std::pair{"eps_pa", eps_pa}}) {
    if (!(eps > 0.0 && eps < 1.0)) {
      throw DomainError(std::string("FiniteSizeParams.") + name + " must lie in (0, 1)");
    }
  }
  if (dim_hx != 2) throw DomainError("FiniteSizeParams.dim_hx must be 2");
}

double delta_n(double n, double eps_smooth, double eps_pa, int dim_hx) {
  if (!(n >= 1.0)) throw DomainError("delta_n: need at least one key-generating signal");
  if (!(eps_smooth > 0.0 && eps_smooth < 1.0) || !(eps_pa > 0.0 && eps_pa < 1.0)) {
    throw DomainError("delta_n: epsilons must lie in (0, 1)");
  }
  return (2.0 * dim_hx + 3.0) * std::sqrt(std::log2(2.0 / eps_smooth) / n) +
         2.0 / n * std::log2(1.0 / eps_pa);
}

double delta_n(const FiniteSizeParams& fs) {
  fs.validate();
  return delta_n(fs.n(), fs.eps_smooth, fs.eps_pa, fs.dim_hx);
}

double z_quantile(double eps_pe) {
  if (!(eps_pe > 0.0 && eps_pe < 1.0)) {
    throw DomainError("z_quantile: eps_pe must lie in (0, 1)");
  }
  return std::sqrt(2.0) * boost::math::erfc_inv(eps_pe);
}

ChannelEstimate theory_estimate(const ProtocolParams& p) {
  p.validate();
  const LinkPair links = links_of(p);
  ChannelEstimate est;
  est.t1p = std::sqrt(links.trans_ac);
  est.t2p = std::sqrt(links.trans_bc);
  est.s1p2 = 1.0 + links.trans_ac * links.noise_ac;
  est.s2p2 = 1.0 + links.trans_bc * links.noise_bc;
  est.va_hat = p.v_a;
  est.vb_hat = p.v_b;
  return est;
}

ChannelEstimate confidence_deltas(ChannelEstimate est, double m, double eps_pe) {
  if (!(m >= 2.0)) throw DomainError("confidence_deltas: need m >= 2 estimation samples");
  if (!(est.va_hat > 0.0) || !(est.vb_hat > 0.0)) {
    throw DegenerateError("confidence_deltas: modulation variance estimates must be > 0");
  }
  const double z = z_quantile(eps_pe);
  const double root_m = std::sqrt(m);
  const double s1 = std::max(est.s1p2, 0.0);
  const double s2 = std::max(est.s2p2, 0.0);
  est.dt1p = z * std::sqrt(s1 / (m * est.va_hat));
  // Second link normalised by its own modulation variance.
  est.dt2p = z * std::sqrt(s2 / (m * est.vb_hat));
  est.ds1p2 = z * s1 * std::sqrt(2.0) / root_m;
  est.ds2p2 = z * s2 * std::sqrt(2.0) / root_m;
  est.dva = z * est.va_hat * std::sqrt(2.0) / root_m;
  est.dvb = z * est.vb_hat * std::sqrt(2.0) / root_m;
  return est;
}

TwoModeCov estimate_covariance(double t1p, double t2p, double s1p2, double s2p2, double va,
                               double vb) {
  const double squeeze = vb / (vb + 2.0);
  const double ratio = t1p / t2p;
  const double z = std::sqrt(va * va + 2.0 * va);
  const double t2p_sq = t2p * t2p;
  return TwoModeCov{va + 1.0, ratio * ratio * squeeze * va + 1.0 +
                                  squeeze * (s1p2 + s2p2 - 2.0 * t2p_sq) / t2p_sq,
                    ratio * std::sqrt(squeeze) * z};
}

bool WorstCorner::is_central() const noexcept {
  return std::all_of(signs.begin(), signs.end(), [](std::int8_t s) { return s == 0; });
}

std::string WorstCorner::code() const {
  if (is_central()) return "central";
  std::string out(kAxes, '0');
  for (int i = 0; i < kAxes; ++i) out[i] = signs[i] < 0 ? '-' : (signs[i] > 0 ? '+' : '0');
  return out;
}

WorstCorner WorstCorner::parse(const std::string& code) {
  WorstCorner c;
  if (code == "central") return c;
  if (code.size() != kAxes) throw DomainError("WorstCorner::parse: bad code '" + code + "'");
  for (int i = 0; i < kAxes; ++i) {
    switch (code[i]) {
      case '-': c.signs[i] = -1; break;
      case '+': c.signs[i] = 1; break;
      case '0': c.signs[i] = 0; break;
      default: throw DomainError("WorstCorner::parse: bad code '" + code + "'");
    }
  }
  return c;
}

WorstCase worst_case_cov(const ChannelEstimate& est, const WorstCaseOptions& options) {
  std::array<double, WorstCorner::kAxes> centre{est.t1p,  est.t2p,    est.s1p2,
                                                est.s2p2, est.va_hat, est.vb_hat};
  std::array<double, WorstCorner::kAxes> width{est.dt1p, est.dt2p, est.ds1p2, est.ds2p2};
  if (options.variances_estimated) {
    width[WorstCorner::kVa] = est.dva;
    width[WorstCorner::kVb] = est.dvb;
  }
  if (options.detector) {
    centre[WorstCorner::kEta] = options.detector->eta;
    centre[WorstCorner::kVel] = options.detector->v_el;
    width[WorstCorner::kEta] = options.eta_halfwidth;
    width[WorstCorner::kVel] = options.v_el_halfwidth;
  }
  for (int i = 0; i < WorstCorner::kAxes; ++i) {
    if (!std::isfinite(centre[i]) || !(width[i] >= 0.0) || !std::isfinite(width[i])) {
      throw EstimationFailure("worst_case_cov: non-finite estimate or negative half-width");
    }
  }

  WorstCase result;
  if (est.s1p2 < 1.0 || est.s2p2 < 1.0) {
    result.warnings.emplace_back("noise variance estimate below vacuum clamped to 1 SNU");
  }
  if (est.t1p > 1.0 || est.t2p > 1.0) {
    result.warnings.emplace_back("transmittance estimate above 1 clamped to 1");
  }

  std::vector<int> active;
  for (int i = 0; i < WorstCorner::kAxes; ++i) {
    if (width[i] > 0.0) active.push_back(i);
  }

  bool found = false;
  const std::uint32_t corners = 1u << active.size();
  for (std::uint32_t index = 0; index < corners; ++index) {
    WorstCorner corner;
    auto value = centre;
    // Most significant bit belongs to the first active axis, so the index
    // order is lexicographic in Axis order with '-' before '+'.
    for (std::size_t k = 0; k < active.size(); ++k) {
      const int axis = active[k];
      const bool plus = (index >> (active.size() - 1 - k)) & 1u;
      corner.signs[axis] = plus ? 1 : -1;
      value[axis] += plus ? width[axis] : -width[axis];
    }
    CornerPoint pt{std::clamp(value[WorstCorner::kT1], kMinAmplitude, 1.0),
                   std::clamp(value[WorstCorner::kT2], kMinAmplitude, 1.0),
                   std::max(value[WorstCorner::kS1], 1.0),
                   std::max(value[WorstCorner::kS2], 1.0),
                   std::max(value[WorstCorner::kVa], kMinVariance),
                   std::max(value[WorstCorner::kVb], kMinVariance),
                   std::nullopt};
    if (options.detector) {
      pt.detector = DetectorModel{std::clamp(value[WorstCorner::kEta], kMinAmplitude, 1.0),
                                  std::max(value[WorstCorner::kVel], 0.0)};
    }

    double holevo = 0.0;
    TwoModeCov cov;
    try {
      cov = covariance_at(pt);
      holevo = holevo_bound(cov);
    } catch (const Error&) {
      continue;
    }
    if (!std::isfinite(holevo)) continue;
    if (!found || holevo > result.holevo) {
      found = true;
      result.holevo = holevo;
      result.cov = cov;
      result.corner = corner;
    }
  }
  if (!found) {
    throw EstimationFailure("worst_case_cov: no corner of the confidence region is physical");
  }
  return result;
}

const char* to_string(KeyStatus s) noexcept {
  return s == KeyStatus::kPositive ? "positive" : "nonpositive";
}

KeyRateReport finite_key_rate(const ProtocolParams& p, const FiniteSizeParams& fs,
                              const EstimationPolicy& policy) {
  p.validate();
  fs.validate();
  const OneWayEquivalent ow = equivalent_one_way(p);
  const double i_ab = mutual_information(ow.transmittance, ow.chi, p.v_a + 1.0);
  return finite_rate_from(p, fs, theory_estimate(p), i_ab, policy);
}

KeyRateReport finite_key_rate(const ProtocolParams& p, const FiniteSizeParams& fs,
                              const ChannelEstimate& central, const EstimationPolicy& policy) {
  p.validate();
  fs.validate();
  const OneWayEquivalent ow =
      equivalent_one_way(links_from_estimate(central), central.vb_hat, p.detector);
  const double i_ab = mutual_information(ow.transmittance, ow.chi, central.va_hat + 1.0);
  return finite_rate_from(p, fs, central, i_ab, policy);
}

KeyRateReport asymptotic_key_rate(const ProtocolParams& p) {
  p.validate();
  const OneWayEquivalent ow = equivalent_one_way(p);
  WorstCase exact;
  exact.cov = one_way_two_mode_cov(p.v_a, ow);
  exact.holevo = holevo_bound(exact.cov);
  const double i_ab = mutual_information(ow.transmittance, ow.chi, p.v_a + 1.0);
  return assemble(p.beta, i_ab, exact, 0.0, 1.0);
}

}  // namespace cvmdi
