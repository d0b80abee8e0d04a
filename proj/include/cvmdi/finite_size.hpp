#pragma once

// Finite-size key rate: Δ(n) penalty, confidence intervals on the estimated
// channel parameters, worst-case covariance over the confidence box, and the
// final assembly k = (n/N)[β·I_AB - χ_BE^worst - Δ(n)].

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvmdi/gaussian.hpp"
#include "cvmdi/protocol.hpp"

namespace cvmdi {

struct FiniteSizeParams {
  double n_total = 1e10;       ///< N, total exchanged signals
  double est_fraction = 0.5;   ///< m/N, share sacrificed for estimation
  double eps_pe = 1e-10;       ///< parameter-estimation failure probability
  double eps_smooth = 1e-10;   ///< smoothing parameter ε̄
  double eps_pa = 1e-10;       ///< privacy-amplification failure probability
  int dim_hx = 2;              ///< dimension of the raw-key Hilbert space

  double m() const noexcept { return est_fraction * n_total; }
  double n() const noexcept { return n_total - m(); }

  void validate() const;
};

/// Δ(n) = (2·dim+3)·√(log2(2/ε̄)/n) + (2/n)·log2(1/ε_PA). Throws DomainError for n < 1.
double delta_n(double n, double eps_smooth, double eps_pa, int dim_hx = 2);
double delta_n(const FiniteSizeParams& fs);

/// z such that erfc(z/√2) = eps_pe, i.e. a standard normal variable exceeds
/// |z| with probability eps_pe. Throws DomainError outside (0, 1).
double z_quantile(double eps_pe);

/// Estimated channel parameters ahead of the relay's beam splitter, plus the
/// half-widths of their confidence intervals.
struct ChannelEstimate {
  double t1p = 1.0;   ///< Alice-link amplitude transmittance t'1
  double t2p = 1.0;   ///< Bob-link amplitude transmittance t'2
  double s1p2 = 1.0;  ///< Alice-link noise variance σ'1² (SNU)
  double s2p2 = 1.0;  ///< Bob-link noise variance σ'2² (SNU)
  double va_hat = 1.0;
  double vb_hat = 1.0;

  double dt1p = 0.0;
  double dt2p = 0.0;
  double ds1p2 = 0.0;
  double ds2p2 = 0.0;
  double dva = 0.0;
  double dvb = 0.0;
};

/// Exact parameter values of the model as estimator centres, zero widths:
/// t'_i = √T_i, σ'_i² = 1 + T_i ε_i, V̂ = V.
ChannelEstimate theory_estimate(const ProtocolParams& p);

/// Fill the six half-widths for m estimation samples at failure probability
/// eps_pe. Throws DomainError for m < 2.
ChannelEstimate confidence_deltas(ChannelEstimate est, double m, double eps_pe);

/// Covariance of the equivalent one-way protocol written directly in the
/// pre-beam-splitter estimates (ideal relay detection).
TwoModeCov estimate_covariance(double t1p, double t2p, double s1p2, double s2p2, double va,
                               double vb);

/// Corner of the confidence box: one sign in {-1, 0, +1} per axis, 0 when the
/// axis has zero width.
struct WorstCorner {
  enum Axis { kT1, kT2, kS1, kS2, kVa, kVb, kEta, kVel, kAxes };
  std::array<std::int8_t, kAxes> signs{};

  bool is_central() const noexcept;
  /// "central", or one character per axis from {-,0,+} in Axis order.
  std::string code() const;
  static WorstCorner parse(const std::string& code);
  friend bool operator==(const WorstCorner&, const WorstCorner&) = default;
};

struct WorstCaseOptions {
  /// Include the V_A, V_B intervals in the corner search.
  bool variances_estimated = true;
  std::optional<DetectorModel> detector;
  /// Optional uncertainty on the calibrated detector constants.
  double eta_halfwidth = 0.0;
  double v_el_halfwidth = 0.0;
};

struct WorstCase {
  TwoModeCov cov;
  WorstCorner corner;
  double holevo = 0.0;
  std::vector<std::string> warnings;
};

/// Evaluate the covariance at every corner of the confidence box and keep the
/// one with the largest Holevo bound (first index wins ties). Corners are
/// clamped to t' in (0, 1], σ'² >= 1. Throws EstimationFailure when no corner
/// yields a physical state.
WorstCase worst_case_cov(const ChannelEstimate& est, const WorstCaseOptions& options = {});

enum class KeyStatus { kPositive, kNonpositive };

struct KeyRateReport {
  double i_ab = 0.0;
  double chi_be_worst = 0.0;
  double delta_n = 0.0;
  double key_fraction = 1.0;  ///< n/N
  double k = 0.0;
  WorstCorner worst_corner;
  KeyStatus status = KeyStatus::kNonpositive;
  std::vector<std::string> warnings;

  bool positive() const noexcept { return status == KeyStatus::kPositive; }
};

const char* to_string(KeyStatus s) noexcept;

/// Modelling switches applied on top of the key-rate formula.
struct EstimationPolicy {
  bool include_variance_intervals = true;
  /// Evaluate I_AB at the worst-case corner instead of the central values.
  bool iab_at_worst = false;
  double eta_halfwidth = 0.0;
  double v_el_halfwidth = 0.0;
};

/// Theory mode: estimator centres at the true model values, only the
/// confidence widening is applied.
KeyRateReport finite_key_rate(const ProtocolParams& p, const FiniteSizeParams& fs,
                              const EstimationPolicy& policy = {});

/// Sample mode: centres taken from `central` (its half-widths are ignored and
/// recomputed from fs). p supplies β and the detector model only.
KeyRateReport finite_key_rate(const ProtocolParams& p, const FiniteSizeParams& fs,
                              const ChannelEstimate& central,
                              const EstimationPolicy& policy = {});

/// β·I_AB - χ_BE at the exact parameters, no sampling overhead.
KeyRateReport asymptotic_key_rate(const ProtocolParams& p);

}  // namespace cvmdi
