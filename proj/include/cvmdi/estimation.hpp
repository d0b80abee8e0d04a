#pragma once

// Monte Carlo ground truth for parameter estimation on the linear Gaussian
// channel y = t'·x + z, x ~ N(0, V), z ~ N(0, σ'²).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cvmdi/finite_size.hpp"
#include "cvmdi/protocol.hpp"

namespace cvmdi {

/// splitmix64 finaliser applied to (seed, a, b); used to give every trial and
/// channel its own independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Standard normal variates from mt19937_64 via the Box-Muller transform.
/// Output is bit-identical across platforms for a given seed.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform_open();  // (0, 1]

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SampleSet {
  std::vector<double> x;
  std::vector<double> y;
  std::uint64_t seed = 0;

  std::size_t m() const noexcept { return x.size(); }
};

struct EstimationResult {
  double t_hat = 0.0;
  double sigma2_hat = 0.0;
  double v_hat = 0.0;
};

/// m pairs (x_i, t'·x_i + z_i). Throws DomainError for sigma2 < 0, v_mod <= 0
/// or m < 2.
SampleSet generate_samples(double t_prime, double sigma2, double v_mod, std::size_t m,
                           std::uint64_t seed);

/// Maximum-likelihood estimators of the normal linear model:
/// t̂ = Σxy/Σx², σ̂² = (1/m)Σ(y - t̂x)², V̂ = (1/m)Σx².
/// Throws DegenerateError when Σx² = 0.
EstimationResult mle_estimate(std::span<const double> x, std::span<const double> y);
EstimationResult mle_estimate(const SampleSet& s);

/// Same estimators as generate_samples + mle_estimate with the same seed, but
/// accumulated on the fly so m can be far larger than memory allows.
EstimationResult estimate_streaming(double t_prime, double sigma2, double v_mod, double m,
                                    std::uint64_t seed);

/// (T̂, ε̂) per link: T = t̂², ε = (σ̂² - 1)/t̂². ε̂ is reported raw and may be
/// negative. Throws DegenerateError for t̂ = 0.
LinkPair derived_channel_estimates(const EstimationResult& alice, const EstimationResult& bob);

/// Combine per-link estimates into the centres of a ChannelEstimate.
ChannelEstimate to_channel_estimate(const EstimationResult& alice, const EstimationResult& bob);

struct LinkTruth {
  double t_prime = 1.0;
  double sigma2 = 1.0;
  double v_mod = 1.0;
};

struct ChannelTruth {
  LinkTruth alice;
  LinkTruth bob;
};

/// True pre-beam-splitter parameters implied by a protocol scenario.
ChannelTruth channel_truth(const ProtocolParams& p);

struct CoverageRecord {
  static constexpr std::array<const char*, 6> kNames{"t1p", "t2p", "s1p2", "s2p2", "v_a", "v_b"};
  std::array<double, 6> truth{};
  std::array<double, 6> coverage{};
  std::size_t trials = 0;

  double min_coverage() const;
};

/// Fraction of trials whose confidence interval (at eps_pe, from m samples per
/// link) contains the true value, per parameter. Alice's and Bob's links use
/// disjoint streams. Deterministic for a given seed regardless of `threads`.
CoverageRecord coverage_experiment(const ChannelTruth& truth, std::size_t m, double eps_pe,
                                   std::size_t trials, std::uint64_t seed, unsigned threads = 1);

/// Standardised slope errors (t̂ - t')/√(σ'²/Σx²), one per trial.
std::vector<double> slope_z_scores(const LinkTruth& truth, std::size_t m, std::size_t trials,
                                   std::uint64_t seed, unsigned threads = 1);

/// m·σ̂²/σ'², one per trial; χ²(m-1) distributed under the model.
std::vector<double> noise_chi2_statistics(const LinkTruth& truth, std::size_t m,
                                          std::size_t trials, std::uint64_t seed,
                                          unsigned threads = 1);

/// Kolmogorov-Smirnov distance between the empirical CDF of `values` and the
/// standard normal CDF.
double ks_statistic_normal(std::vector<double> values);

/// Asymptotic 1% critical value of the one-sample KS statistic, 1.628/√n.
double ks_critical_1pct(std::size_t n);

/// Write "x,y" header and one pair per line at 17 significant digits.
void write_samples(std::ostream& out, const SampleSet& s);

}  // namespace cvmdi
