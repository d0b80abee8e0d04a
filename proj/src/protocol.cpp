#include "cvmdi/protocol.hpp"

#include <cmath>
#include <string>

#include "cvmdi/error.hpp"

namespace cvmdi {
namespace {

void require(bool ok, const char* field, const char* rule) {
  if (!ok) throw DomainError(std::string("ProtocolParams.") + field + " must be " + rule);
}

}  // namespace

double DetectorModel::thermal_variance() const {
  if (eta < 1.0) return 1.0 + v_el / (1.0 - eta);
  if (v_el == 0.0) return 1.0;
  throw DomainError("DetectorModel: thermal variance undefined for eta = 1 with v_el > 0");
}

void DetectorModel::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("DetectorModel.eta must lie in (0, 1]");
  if (!(v_el >= 0.0) || !std::isfinite(v_el)) {
    throw DomainError("DetectorModel.v_el must be finite and >= 0");
  }
}

void ProtocolParams::validate() const {
  require(v_a >= 0.0 && std::isfinite(v_a), "v_a", "finite and >= 0");
  require(v_b >= 0.0 && std::isfinite(v_b), "v_b", "finite and >= 0");
  require(l_ac >= 0.0 && std::isfinite(l_ac), "l_ac", "finite and >= 0");
  require(l_bc >= 0.0 && std::isfinite(l_bc), "l_bc", "finite and >= 0");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha", "finite and > 0");
  require(eps1 >= 0.0 && std::isfinite(eps1), "eps1", "finite and >= 0");
  require(eps2 >= 0.0 && std::isfinite(eps2), "eps2", "finite and >= 0");
  require(beta >= 0.0 && beta <= 1.0, "beta", "in [0, 1]");
  if (detector) detector->validate();
}

double fiber_transmittance(double length_km, double alpha_db_per_km) {
  if (!(length_km >= 0.0)) throw DomainError("fiber_transmittance: negative length");
  if (!(alpha_db_per_km > 0.0)) throw DomainError("fiber_transmittance: alpha must be > 0");
  return std::pow(10.0, -alpha_db_per_km * length_km / 10.0);
}

LinkPair links_of(const ProtocolParams& p) {
  LinkPair links{fiber_transmittance(p.l_ac, p.alpha), fiber_transmittance(p.l_bc, p.alpha),
                 p.eps1, p.eps2};
  if (!(links.trans_ac > 0.0) || !(links.trans_bc > 0.0)) {
    throw DegenerateError("links_of: channel transmittance underflows to zero");
  }
  return links;
}

FourModeCov::FourModeCov(double v1, double v2, double t1, double t2, double chi1, double chi2)
    : v1_(v1), v2_(v2), t1_(t1), t2_(t2), chi1_(chi1), chi2_(chi2) {}

bool FourModeCov::block_is_z(Mode i, Mode j) noexcept {
  // Correlations between a sender mode and a relay mode carry Z; everything
  // else (diagonal blocks, relay-relay, sender-sender) is proportional to I.
  const bool i_sender = (i == kA1 || i == kB1);
  const bool j_sender = (j == kA1 || j == kB1);
  return i_sender != j_sender;
}

double FourModeCov::block(Mode i, Mode j) const noexcept {
  if (i > j) std::swap(i, j);
  const double arm1 = 0.5 * t1_ * (v1_ + chi1_);
  const double arm2 = 0.5 * t2_ * (v2_ + chi2_);
  const double corr1 = std::sqrt(0.5 * t1_ * (v1_ * v1_ - 1.0));
  const double corr2 = std::sqrt(0.5 * t2_ * (v2_ * v2_ - 1.0));
  switch (i) {
    case kA1:
      switch (j) {
        case kA1: return v1_;
        case kC:
        case kD: return corr1;
        case kB1: return 0.0;
      }
      break;
    case kC:
      switch (j) {
        case kC: return arm1 + arm2;
        case kD: return arm1 - arm2;
        case kB1: return corr2;
        default: break;
      }
      break;
    case kD:
      if (j == kD) return arm1 + arm2;
      return -corr2;
    case kB1: return v2_;
  }
  return 0.0;
}

FourModeCov::Matrix FourModeCov::matrix() const {
  Matrix m{};
  for (int i = 0; i < kModes; ++i) {
    for (int j = 0; j < kModes; ++j) {
      const auto mi = static_cast<Mode>(i);
      const auto mj = static_cast<Mode>(j);
      const double coeff = block(mi, mj);
      const double sign_p = block_is_z(mi, mj) ? -1.0 : 1.0;
      m[2 * i][2 * j] = coeff;
      m[2 * i + 1][2 * j + 1] = sign_p * coeff;
    }
  }
  return m;
}

FourModeCov build_four_mode_cov(const ProtocolParams& p) {
  p.validate();
  const LinkPair links = links_of(p);
  const double chi1 = 1.0 / links.trans_ac - 1.0 + links.noise_ac;
  const double chi2 = 1.0 / links.trans_bc - 1.0 + links.noise_bc;
  return FourModeCov(p.v_a + 1.0, p.v_b + 1.0, links.trans_ac, links.trans_bc, chi1, chi2);
}

SecondMoments observed_second_moments(const ProtocolParams& p) {
  p.validate();
  const LinkPair links = links_of(p);
  const double t1 = links.trans_ac, t2 = links.trans_bc;
  const double eta = p.detector ? p.detector->eta : 1.0;
  const double v_el = p.detector ? p.detector->v_el : 0.0;

  SecondMoments m;
  m.x1_sq = p.v_a;
  m.x2_sq = p.v_b;
  m.y1_sq = 0.5 * eta * (t1 * p.v_a + t2 * p.v_b) +
            0.5 * eta * (t1 * links.noise_ac + t2 * links.noise_bc) + 1.0 + v_el;
  m.y2_sq = m.y1_sq;
  m.x1y1 = std::sqrt(eta * t1 / 2.0) * p.v_a;
  m.x2y2 = std::sqrt(eta * t2 / 2.0) * p.v_b;
  m.y1y2 = 0.5 * eta * (t1 * p.v_a - t2 * p.v_b) +
           0.5 * eta * (t1 * links.noise_ac - t2 * links.noise_bc);
  return m;
}

std::pair<double, double> pre_bs_transform(double y1, double y2) noexcept {
  const double s = 1.0 / std::sqrt(2.0);
  return {(y1 + y2) * s, (y1 - y2) * s};
}

OneWayEquivalent equivalent_one_way(const LinkPair& links, double v_b,
                                    const std::optional<DetectorModel>& detector) {
  if (!(v_b > 0.0)) {
    throw DegenerateError("equivalent_one_way: displacement gain undefined for v_b = 0");
  }
  const double t1 = links.trans_ac, t2 = links.trans_bc;
  if (!(t1 > 0.0) || !(t2 > 0.0)) {
    throw DegenerateError("equivalent_one_way: zero channel transmittance");
  }
  const double squeeze = v_b / (v_b + 2.0);

  OneWayEquivalent ow;
  if (!detector) {
    ow.gain = std::sqrt(2.0 / t2) * std::sqrt(squeeze);
    ow.transmittance = 0.5 * t1 * ow.gain * ow.gain;
    ow.eps_prime = links.noise_ac + (t2 * (links.noise_bc - 2.0) + 2.0) / t1;
  } else {
    detector->validate();
    const double eta = detector->eta;
    const double chi1 = 1.0 / t1 - 1.0 + links.noise_ac;
    const double chi2 = 1.0 / t2 - 1.0 + links.noise_bc;
    ow.gain = std::sqrt(2.0 / (eta * t2)) * std::sqrt(squeeze);
    // The relay sees Alice's signal attenuated by eta, which the eta in the
    // gain compensates.
    ow.transmittance = 0.5 * eta * t1 * ow.gain * ow.gain;
    ow.eps_prime = 1.0 + (t1 * chi1 + t2 * chi2 - t2) / t1 + 2.0 * detector->chi_detection() / t1;
  }
  ow.chi = 1.0 / ow.transmittance - 1.0 + ow.eps_prime;
  return ow;
}

OneWayEquivalent equivalent_one_way(const ProtocolParams& p) {
  p.validate();
  return equivalent_one_way(links_of(p), p.v_b, p.detector);
}

TwoModeCov one_way_two_mode_cov(double v_a, const OneWayEquivalent& ow) {
  if (!(v_a >= 0.0) || !std::isfinite(v_a)) {
    throw PhysicalityError("one_way_two_mode_cov: modulation variance v_a must be >= 0");
  }
  if (!(ow.transmittance > 0.0) || !std::isfinite(ow.transmittance)) {
    throw PhysicalityError("one_way_two_mode_cov: transmittance must be > 0");
  }
  const double t = ow.transmittance;
  const double v1 = v_a + 1.0;
  TwoModeCov cov{v1, t * v_a + 1.0 + t * ow.eps_prime, std::sqrt(t * (v1 * v1 - 1.0))};
  if (!cov.is_physical()) {
    if (ow.eps_prime < 0.0) {
      throw PhysicalityError("one_way_two_mode_cov: eps_prime = " + std::to_string(ow.eps_prime) +
                             " is negative");
    }
    throw PhysicalityError("one_way_two_mode_cov: transmittance = " + std::to_string(t) +
                           " gives an unphysical state");
  }
  return cov;
}

}  // namespace cvmdi
