#include "cvmdi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "cvmdi/error.hpp"
#include "cvmdi/parallel.hpp"

namespace cvmdi {
namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_link(double sigma2, double v_mod, double m) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw DomainError("sample generation: sigma2 must be finite and >= 0");
  }
  if (!(v_mod > 0.0) || !std::isfinite(v_mod)) {
    throw DomainError("sample generation: v_mod must be finite and > 0");
  }
  if (!(m >= 2.0)) throw DomainError("sample generation: need m >= 2");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

double GaussianStream::uniform_open() {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double phi = 2.0 * std::numbers::pi * uniform_open();
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

SampleSet generate_samples(double t_prime, double sigma2, double v_mod, std::size_t m,
                           std::uint64_t seed) {
  check_link(sigma2, v_mod, static_cast<double>(m));
  SampleSet s;
  s.seed = seed;
  s.x.resize(m);
  s.y.resize(m);
  GaussianStream g(seed);
  const double sx = std::sqrt(v_mod), sz = std::sqrt(sigma2);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = sx * g.next();
    const double z = sz * g.next();
    s.x[i] = x;
    s.y[i] = t_prime * x + z;
  }
  return s;
}

EstimationResult mle_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("mle_estimate: x and y differ in length");
  if (x.size() < 2) throw DomainError("mle_estimate: need at least two samples");
  long double sxx = 0.0L, sxy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  if (sxx == 0.0L) throw DegenerateError("mle_estimate: all sender samples are zero");
  const double m = static_cast<double>(x.size());
  EstimationResult r;
  r.t_hat = static_cast<double>(sxy / sxx);
  long double rss = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double e = y[i] - static_cast<long double>(r.t_hat) * x[i];
    rss += e * e;
  }
  r.sigma2_hat = static_cast<double>(rss / m);
  r.v_hat = static_cast<double>(sxx / m);
  return r;
}

EstimationResult mle_estimate(const SampleSet& s) { return mle_estimate(s.x, s.y); }

EstimationResult estimate_streaming(double t_prime, double sigma2, double v_mod, double m,
                                    std::uint64_t seed) {
  check_link(sigma2, v_mod, m);
  const auto count = static_cast<std::uint64_t>(m);
  GaussianStream g(seed);
  const double sx = std::sqrt(v_mod), sz = std::sqrt(sigma2);
  long double sxx = 0.0L, sxy = 0.0L, syy = 0.0L;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double x = sx * g.next();
    const double z = sz * g.next();
    const double y = t_prime * x + z;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
    syy += static_cast<long double>(y) * y;
  }
  if (sxx == 0.0L) throw DegenerateError("estimate_streaming: all sender samples are zero");
  const long double n = static_cast<long double>(count);
  EstimationResult r;
  r.t_hat = static_cast<double>(sxy / sxx);
  r.sigma2_hat = static_cast<double>(std::max(0.0L, syy - sxy * sxy / sxx) / n);
  r.v_hat = static_cast<double>(sxx / n);
  return r;
}

LinkPair derived_channel_estimates(const EstimationResult& alice, const EstimationResult& bob) {
  if (alice.t_hat == 0.0 || bob.t_hat == 0.0) {
    throw DegenerateError("derived_channel_estimates: zero transmittance estimate");
  }
  const double t1 = alice.t_hat * alice.t_hat;
  const double t2 = bob.t_hat * bob.t_hat;
  return {t1, t2, (alice.sigma2_hat - 1.0) / t1, (bob.sigma2_hat - 1.0) / t2};
}

ChannelEstimate to_channel_estimate(const EstimationResult& alice, const EstimationResult& bob) {
  ChannelEstimate est;
  est.t1p = alice.t_hat;
  est.t2p = bob.t_hat;
  est.s1p2 = alice.sigma2_hat;
  est.s2p2 = bob.sigma2_hat;
  est.va_hat = alice.v_hat;
  est.vb_hat = bob.v_hat;
  return est;
}

ChannelTruth channel_truth(const ProtocolParams& p) {
  const ChannelEstimate c = theory_estimate(p);
  return {{c.t1p, c.s1p2, p.v_a}, {c.t2p, c.s2p2, p.v_b}};
}

double CoverageRecord::min_coverage() const {
  return *std::min_element(coverage.begin(), coverage.end());
}

CoverageRecord coverage_experiment(const ChannelTruth& truth, std::size_t m, double eps_pe,
                                   std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 100) throw DomainError("coverage_experiment: need at least 100 trials");
  CoverageRecord rec;
  rec.trials = trials;
  rec.truth = {truth.alice.t_prime, truth.bob.t_prime, truth.alice.sigma2,
               truth.bob.sigma2,    truth.alice.v_mod, truth.bob.v_mod};

  std::vector<std::array<bool, 6>> inside(trials);
  parallel_for(trials, threads, [&](std::size_t trial) {
    const auto& a = truth.alice;
    const auto& b = truth.bob;
    const double md = static_cast<double>(m);
    const EstimationResult ea =
        estimate_streaming(a.t_prime, a.sigma2, a.v_mod, md, derive_seed(seed, trial, 0));
    const EstimationResult eb =
        estimate_streaming(b.t_prime, b.sigma2, b.v_mod, md, derive_seed(seed, trial, 1));
    const ChannelEstimate est = confidence_deltas(to_channel_estimate(ea, eb), md, eps_pe);
    const std::array<double, 6> centre{est.t1p, est.t2p, est.s1p2, est.s2p2, est.va_hat, est.vb_hat};
    const std::array<double, 6> width{est.dt1p, est.dt2p, est.ds1p2, est.ds2p2, est.dva, est.dvb};
    for (int k = 0; k < 6; ++k) inside[trial][k] = std::abs(rec.truth[k] - centre[k]) <= width[k];
  });

  for (int k = 0; k < 6; ++k) {
    std::size_t hits = 0;
    for (const auto& row : inside) hits += row[k] ? 1 : 0;
    rec.coverage[k] = static_cast<double>(hits) / static_cast<double>(trials);
  }
  return rec;
}

std::vector<double> slope_z_scores(const LinkTruth& truth, std::size_t m, std::size_t trials,
                                   std::uint64_t seed, unsigned threads) {
  std::vector<double> out(trials);
  parallel_for(trials, threads, [&](std::size_t trial) {
    const double md = static_cast<double>(m);
    const EstimationResult e =
        estimate_streaming(truth.t_prime, truth.sigma2, truth.v_mod, md, derive_seed(seed, trial, 0));
    const double sum_x2 = e.v_hat * md;
    out[trial] = (e.t_hat - truth.t_prime) / std::sqrt(truth.sigma2 / sum_x2);
  });
  return out;
}

std::vector<double> noise_chi2_statistics(const LinkTruth& truth, std::size_t m,
                                          std::size_t trials, std::uint64_t seed,
                                          unsigned threads) {
  std::vector<double> out(trials);
  parallel_for(trials, threads, [&](std::size_t trial) {
    const double md = static_cast<double>(m);
    const EstimationResult e =
        estimate_streaming(truth.t_prime, truth.sigma2, truth.v_mod, md, derive_seed(seed, trial, 0));
    out[trial] = md * e.sigma2_hat / truth.sigma2;
  });
  return out;
}

double ks_statistic_normal(std::vector<double> values) {
  if (values.empty()) throw DomainError("ks_statistic_normal: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-values[i] / std::numbers::sqrt2);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

void write_samples(std::ostream& out, const SampleSet& s) {
  const auto old = out.precision(17);
  out << "x,y\n";
  for (std::size_t i = 0; i < s.m(); ++i) out << s.x[i] << ',' << s.y[i] << '\n';
  out.precision(old);
}

}  // namespace cvmdi
