#pragma once

// Entropic primitives for two-mode Gaussian states in standard form.
//
// All variances are in shot-noise units (vacuum = 1); all entropies are in
// bits. The covariance matrix of a standard-form two-mode state is
//
//     | a·I   c·Z |
//     | c·Z   b·I |      with Z = diag(1, -1),
//
// and is fully described by the three scalars (a, b, c).

namespace cvmdi {

/// Absolute tolerance applied to symplectic eigenvalues and physicality checks.
inline constexpr double kPhysicalityTol = 1e-9;

struct TwoModeCov {
  double a = 1.0;  ///< variance of the sender-side mode
  double b = 1.0;  ///< variance of the receiver-side mode
  double c = 0.0;  ///< correlation amplitude

  /// True when both modes respect the vacuum bound and both symplectic
  /// eigenvalues are at least one, up to kPhysicalityTol (scaled by the
  /// magnitude of the entries for large modulations).
  bool is_physical() const noexcept;
};

struct SymplecticSpectrum {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  /// Eigenvalue of the sender mode conditioned on a heterodyne measurement of
  /// the receiver mode. Left at 1 by symplectic_eigenvalues().
  double lambda3_cond = 1.0;
};

/// Bosonic entropy function G(x) = (x+1)log2(x+1) - x log2 x, with G(0) = 0.
/// Throws DomainError for x < 0 or non-finite x.
double g_func(double x);

/// Von Neumann entropy contribution of one symplectic eigenvalue, G((λ-1)/2).
/// Eigenvalues in [1 - tol, 1) are treated as exactly 1.
double mode_entropy(double lambda);

/// lambda1 >= lambda2 of the two-mode matrix. Throws PhysicalityError when the
/// discriminant is negative beyond tolerance or a resulting eigenvalue falls
/// below 1 - kPhysicalityTol.
SymplecticSpectrum symplectic_eigenvalues(const TwoModeCov& cov);

/// a - c²/(b+1): the sender mode after heterodyne detection of the receiver.
double conditional_eigenvalue_heterodyne(const TwoModeCov& cov);

/// Full spectrum including the heterodyne-conditioned eigenvalue.
SymplecticSpectrum full_spectrum(const TwoModeCov& cov);

/// Holevo information between the receiver's heterodyne data and an
/// eavesdropper holding the purification (reverse reconciliation):
///   G((λ1-1)/2) + G((λ2-1)/2) - G((λ3-1)/2).
double holevo_bound(const TwoModeCov& cov);

/// Mutual information between the parties for heterodyne detection,
/// log2[(T(V+χ)+1) / (T(1+χ)+1)], where V is the EB-mode variance
/// (modulation + 1) and χ the total added noise referred to the input.
/// Throws DomainError on a nonpositive log argument or T <= 0.
double mutual_information(double transmittance, double chi, double variance);

/// The same quantity read directly off a standard-form matrix:
/// log2[(b+1) / (b - c²/(a+1) + 1)].
double mutual_information(const TwoModeCov& cov);

}  // namespace cvmdi
