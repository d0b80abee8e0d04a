#include "cvmdi/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "cvmdi/error.hpp"

namespace cvmdi {
namespace {

std::string describe(const TwoModeCov& cov) {
  std::ostringstream os;
  os.precision(17);
  os << "(a=" << cov.a << ", b=" << cov.b << ", c=" << cov.c << ")";
  return os.str();
}

// Tolerance for products of entries; large modulations make the absolute
// rounding error on c² grow with a·b.
double product_tol(const TwoModeCov& cov) {
  return kPhysicalityTol + 1e-14 * std::abs(cov.a * cov.b);
}

double snap_to_vacuum(double lambda) {
  return (lambda < 1.0 && lambda >= 1.0 - kPhysicalityTol) ? 1.0 : lambda;
}

}  // namespace

bool TwoModeCov::is_physical() const noexcept {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) return false;
  if (a < 1.0 - kPhysicalityTol || b < 1.0 - kPhysicalityTol) return false;
  const double c2 = c * c;
  const double tol = product_tol(*this);
  return c2 <= (a - 1.0) * (b + 1.0) + tol && c2 <= (a + 1.0) * (b - 1.0) + tol;
}

double g_func(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("g_func: argument must be finite and nonnegative, got " +
                      std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  // (x+1)log2(x+1) - x log2 x = log2(x+1) + x log2(1 + 1/x); the second form
  // stays accurate for large x where the two terms nearly cancel.
  return std::log2(x + 1.0) + x * std::log1p(1.0 / x) / std::log(2.0);
}

double mode_entropy(double lambda) {
  lambda = snap_to_vacuum(lambda);
  return g_func((lambda - 1.0) / 2.0);
}

SymplecticSpectrum symplectic_eigenvalues(const TwoModeCov& cov) {
  const double a = cov.a, b = cov.b, c = cov.c;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw PhysicalityError("symplectic_eigenvalues: non-finite entry " + describe(cov));
  }
  const double det = a * b - c * c;
  const double delta = a * a + b * b - 2.0 * c * c;
  // delta² - 4 det² factors as (a-b)²[(a+b)² - 4c²]; the factored form avoids
  // cancelling two O(a⁴) terms.
  const double inner = (a + b) * (a + b) - 4.0 * c * c;
  if (inner < -product_tol(cov) * 4.0) {
    throw PhysicalityError("symplectic_eigenvalues: negative discriminant for " + describe(cov));
  }
  const double root = std::abs(a - b) * std::sqrt(std::max(inner, 0.0));
  const double l1_sq = 0.5 * (delta + root);
  if (!(l1_sq > 0.0) || det < 0.0) {
    throw PhysicalityError("symplectic_eigenvalues: indefinite matrix " + describe(cov));
  }
  SymplecticSpectrum s;
  s.lambda1 = std::sqrt(l1_sq);
  s.lambda2 = det / s.lambda1;  // λ1·λ2 = det exactly
  if (s.lambda2 > s.lambda1) std::swap(s.lambda1, s.lambda2);
  if (s.lambda2 < 1.0 - kPhysicalityTol) {
    throw PhysicalityError("symplectic_eigenvalues: eigenvalue " + std::to_string(s.lambda2) +
                           " below vacuum for " + describe(cov));
  }
  s.lambda1 = snap_to_vacuum(s.lambda1);
  s.lambda2 = snap_to_vacuum(s.lambda2);
  return s;
}

double conditional_eigenvalue_heterodyne(const TwoModeCov& cov) {
  if (!cov.is_physical()) {
    throw PhysicalityError("conditional_eigenvalue_heterodyne: unphysical " + describe(cov));
  }
  return snap_to_vacuum(cov.a - cov.c * cov.c / (cov.b + 1.0));
}

SymplecticSpectrum full_spectrum(const TwoModeCov& cov) {
  SymplecticSpectrum s = symplectic_eigenvalues(cov);
  s.lambda3_cond = conditional_eigenvalue_heterodyne(cov);
  return s;
}

double holevo_bound(const TwoModeCov& cov) {
  const SymplecticSpectrum s = full_spectrum(cov);
  return mode_entropy(s.lambda1) + mode_entropy(s.lambda2) - mode_entropy(s.lambda3_cond);
}

double mutual_information(double transmittance, double chi, double variance) {
  // T > 1 is legitimate: the relay's displacement can amplify the signal.
  if (!(transmittance > 0.0) || !std::isfinite(transmittance)) {
    throw DomainError("mutual_information: transmittance must be finite and > 0");
  }
  const double num = transmittance * (variance + chi) + 1.0;
  const double den = transmittance * (1.0 + chi) + 1.0;
  if (!(num > 0.0 && den > 0.0)) {
    throw DomainError("mutual_information: nonpositive log argument");
  }
  return std::log2(num / den);
}

double mutual_information(const TwoModeCov& cov) {
  const double cond = cov.b - cov.c * cov.c / (cov.a + 1.0);
  const double num = cov.b + 1.0;
  const double den = cond + 1.0;
  if (!(num > 0.0 && den > 0.0)) {
    throw DomainError("mutual_information: nonpositive log argument");
  }
  return std::log2(num / den);
}

}  // namespace cvmdi
