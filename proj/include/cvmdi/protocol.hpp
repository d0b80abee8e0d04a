#pragma once

// Physical scenario of the measurement-device-independent setup: two senders
// (Alice, Bob) send Gaussian-modulated coherent states over fibre to an
// untrusted relay (Charlie) that performs a CV Bell measurement.

#include <array>
#include <optional>
#include <utility>

#include "cvmdi/gaussian.hpp"

namespace cvmdi {

/// Imperfect homodyne detectors at the relay, shared by both homodynes.
struct DetectorModel {
  double eta = 1.0;   ///< detection efficiency, (0, 1]
  double v_el = 0.0;  ///< electronic noise variance (SNU)

  /// Variance of the thermal mode entering the efficiency beam splitter,
  /// 1 + v_el/(1-eta). Only defined for eta < 1.
  double thermal_variance() const;
  /// Detection noise referred to the detector input, (1-eta)/eta + v_el/eta.
  double chi_detection() const noexcept { return (1.0 - eta) / eta + v_el / eta; }

  void validate() const;
};

struct ProtocolParams {
  double v_a = 1e5;         ///< Alice modulation variance (SNU)
  double v_b = 1e5;         ///< Bob modulation variance (SNU)
  double l_ac = 0.0;        ///< Alice-Charlie fibre length (km)
  double l_bc = 0.0;        ///< Bob-Charlie fibre length (km)
  double alpha = 0.2;       ///< fibre loss (dB/km)
  double eps1 = 0.002;      ///< Alice-channel excess noise (SNU)
  double eps2 = 0.002;      ///< Bob-channel excess noise (SNU)
  double beta = 1.0;        ///< reconciliation efficiency
  std::optional<DetectorModel> detector;

  /// Throws DomainError naming the first offending field.
  void validate() const;
};

/// Transmittances and excess noises of the two links, independent of how
/// they were obtained (fibre model or parameter estimation).
struct LinkPair {
  double trans_ac = 1.0;
  double trans_bc = 1.0;
  double noise_ac = 0.0;
  double noise_bc = 0.0;
};

/// 10^(-alpha·length/10).
double fiber_transmittance(double length_km, double alpha_db_per_km);

/// Links implied by the fibre lengths of p. Throws DegenerateError when a
/// transmittance underflows to zero.
LinkPair links_of(const ProtocolParams& p);

/// Four-mode (A1, C, D, B1) covariance before the relay's homodynes. The
/// scalars are authoritative; matrix() expands them on demand.
class FourModeCov {
 public:
  static constexpr int kModes = 4;
  static constexpr int kDim = 2 * kModes;
  enum Mode { kA1 = 0, kC = 1, kD = 2, kB1 = 3 };
  using Matrix = std::array<std::array<double, kDim>, kDim>;

  FourModeCov(double v1, double v2, double t1, double t2, double chi1, double chi2);

  double v1() const noexcept { return v1_; }
  double v2() const noexcept { return v2_; }
  double t1() const noexcept { return t1_; }
  double t2() const noexcept { return t2_; }
  double chi1() const noexcept { return chi1_; }
  double chi2() const noexcept { return chi2_; }

  /// Scalar coefficient of the 2×2 block (i, j): the block is
  /// coefficient·I for diagonal-type blocks and coefficient·Z otherwise.
  double block(Mode i, Mode j) const noexcept;
  /// True when block (i, j) is proportional to Z = diag(1, -1).
  static bool block_is_z(Mode i, Mode j) noexcept;

  Matrix matrix() const;

 private:
  double v1_, v2_, t1_, t2_, chi1_, chi2_;
};

FourModeCov build_four_mode_cov(const ProtocolParams& p);

/// Prepare-and-measure second moments seen by the three parties.
struct SecondMoments {
  double x1_sq = 0.0;  ///< <x1²>, Alice's modulation
  double x2_sq = 0.0;  ///< <x2²>, Bob's modulation
  double y1_sq = 0.0;  ///< <y1²>, first relay output
  double y2_sq = 0.0;  ///< <y2²>, second relay output
  double x1y1 = 0.0;
  double x2y2 = 0.0;
  double y1y2 = 0.0;
};

/// Second moments for the ideal relay, or with p.detector the imperfect
/// homodyne model (efficiency eta, electronic noise v_el).
SecondMoments observed_second_moments(const ProtocolParams& p);

/// Undo the relay's balanced beam splitter: ((y1+y2)/√2, (y1-y2)/√2).
std::pair<double, double> pre_bs_transform(double y1, double y2) noexcept;

/// Equivalent one-way protocol obtained when Bob's preparation and
/// displacement are attributed to the eavesdropper.
struct OneWayEquivalent {
  /// Exceeds 1 when the Bob-Charlie link is the lossier one: the
  /// displacement then amplifies Alice's signal.
  double transmittance = 1.0;
  double eps_prime = 0.0;  ///< equivalent excess noise (SNU)
  double gain = 1.0;       ///< displacement gain g
  double chi = 0.0;        ///< 1/T - 1 + eps_prime
};

/// One-way reduction with the noise-minimising displacement gain. With a
/// detector the gain is divided by eta and the relay noise enters ε'.
/// Throws DegenerateError for v_b <= 0 or a zero transmittance.
OneWayEquivalent equivalent_one_way(const LinkPair& links, double v_b,
                                    const std::optional<DetectorModel>& detector = std::nullopt);
OneWayEquivalent equivalent_one_way(const ProtocolParams& p);

/// Alice-Bob covariance of the equivalent protocol:
/// a = v_a+1, b = T·v_a + 1 + T·ε', c = √(T((v_a+1)²-1)).
/// Throws PhysicalityError naming the offending parameter.
TwoModeCov one_way_two_mode_cov(double v_a, const OneWayEquivalent& ow);

}  // namespace cvmdi
