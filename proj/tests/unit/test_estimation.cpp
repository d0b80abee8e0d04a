#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "cvmdi/error.hpp"
#include "cvmdi/estimation.hpp"
#include "doctest.h"

using namespace cvmdi;

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("gaussian stream moments") {
  GaussianStream g(42);
  const int n = 400000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = g.next();
    s1 += v;
    s2 += v * v;
    s4 += v * v * v * v;
  }
  CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("sample generation") {
  const auto s = generate_samples(0.7, 0.0, 3.0, 1000, 5);
  CHECK(s.m() == 1000);
  CHECK(s.seed == 5);
  for (std::size_t i = 0; i < s.m(); ++i) CHECK(s.y[i] == 0.7 * s.x[i]);

  const auto a = generate_samples(0.4, 1.1, 2.0, 500, 9);
  const auto b = generate_samples(0.4, 1.1, 2.0, 500, 9);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(generate_samples(0.4, 1.1, 2.0, 500, 10).x != a.x);

  CHECK_THROWS_AS(generate_samples(0.4, -1.0, 2.0, 500, 1), DomainError);
  CHECK_THROWS_AS(generate_samples(0.4, 1.0, 0.0, 500, 1), DomainError);
  CHECK_THROWS_AS(generate_samples(0.4, 1.0, 1.0, 1, 1), DomainError);
}

TEST_CASE("receiver variance of generated samples") {
  const std::size_t m = 1000000;
  const auto s = generate_samples(1.0, 1.0, 1.0, m, 17);
  double sum = 0.0, sum4 = 0.0;
  for (double y : s.y) {
    sum += y * y;
    sum4 += y * y * y * y;
  }
  // y ~ N(0, 2): <y²> = 2, Var(y²) = 2·2².
  CHECK(std::abs(sum / m - 2.0) < 5.0 * std::sqrt(8.0 / m));
  CHECK(sum4 / m == doctest::Approx(12.0).epsilon(0.02));
}

TEST_CASE("maximum-likelihood estimators") {
  const std::vector<double> x{1.0, 2.0}, y{2.0, 4.0};
  auto e = mle_estimate(x, y);
  CHECK(e.t_hat == 2.0);
  CHECK(e.sigma2_hat == 0.0);
  CHECK(e.v_hat == 2.5);

  const std::vector<double> zero{0.0, 0.0};
  e = mle_estimate(x, zero);
  CHECK(e.t_hat == 0.0);
  CHECK(e.sigma2_hat == 0.0);
  CHECK_THROWS_AS(mle_estimate(zero, y), DegenerateError);

  const std::size_t m = 1000000;
  e = mle_estimate(generate_samples(0.5, 1.02, 10.0, m, 3));
  CHECK(std::abs(e.t_hat - 0.5) < 5.0 * std::sqrt(1.02 / (10.0 * m)));
  CHECK(std::abs(e.sigma2_hat - 1.02) < 5.0 * 1.02 * std::sqrt(2.0 / m));
  CHECK(std::abs(e.v_hat - 10.0) < 5.0 * 10.0 * std::sqrt(2.0 / m));
}

TEST_CASE("streaming estimates equal the two-pass estimates") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = generate_samples(0.3, 1.05, 7.0, 20000, seed);
    const auto batch = mle_estimate(s);
    const auto stream = estimate_streaming(0.3, 1.05, 7.0, 20000.0, seed);
    CHECK(stream.t_hat == doctest::Approx(batch.t_hat).epsilon(1e-12));
    CHECK(stream.sigma2_hat == doctest::Approx(batch.sigma2_hat).epsilon(1e-10));
    CHECK(stream.v_hat == doctest::Approx(batch.v_hat).epsilon(1e-12));
  }
}

TEST_CASE("derived channel estimates") {
  auto l = derived_channel_estimates({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
  CHECK(l.trans_ac == 1.0);
  CHECK(l.noise_ac == 0.0);

  l = derived_channel_estimates({0.478598, 1.000458, 1.0}, {1.0, 1.0, 1.0});
  CHECK(l.trans_ac == doctest::Approx(0.229056).epsilon(1e-5));
  CHECK(l.noise_ac == doctest::Approx(0.002).epsilon(1e-3));

  l = derived_channel_estimates({0.5, 0.99, 1.0}, {1.0, 1.0, 1.0});
  CHECK(l.noise_ac == doctest::Approx(-0.04));

  CHECK_THROWS_AS(derived_channel_estimates({0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}), DegenerateError);
}

TEST_CASE("channel truth follows the protocol") {
  ProtocolParams p;
  p.l_ac = 32.0;
  p.l_bc = 0.0;
  const auto t = channel_truth(p);
  CHECK(t.alice.t_prime == doctest::Approx(0.4786300923).epsilon(1e-9));
  CHECK(t.alice.sigma2 == doctest::Approx(1.0004581735).epsilon(1e-10));
  CHECK(t.bob.t_prime == 1.0);
  CHECK(t.alice.v_mod == p.v_a);
}

TEST_CASE("confidence intervals cover at the nominal rate") {
  ProtocolParams p;
  p.l_ac = 20.0;
  p.l_bc = 3.0;
  p.v_a = 40.0;
  p.v_b = 25.0;
  const auto truth = channel_truth(p);

  auto rec = coverage_experiment(truth, 10000, 0.05, 2000, 11);
  CHECK(rec.trials == 2000);
  for (int k = 0; k < 6; ++k) {
    INFO(CoverageRecord::kNames[k]);
    CHECK(rec.coverage[k] >= 0.93);
    CHECK(rec.coverage[k] <= 0.97);
  }

  rec = coverage_experiment(truth, 10000, 0.5, 2000, 12);
  for (int k = 0; k < 6; ++k) {
    INFO(CoverageRecord::kNames[k]);
    CHECK(rec.coverage[k] >= 0.46);
    CHECK(rec.coverage[k] <= 0.54);
  }

  // Coverage does not depend on the sample size.
  rec = coverage_experiment(truth, 1000000, 0.05, 100, 13);
  for (int k = 0; k < 6; ++k) {
    INFO(CoverageRecord::kNames[k]);
    CHECK(rec.coverage[k] >= 0.88);
  }

  CHECK_THROWS_AS(coverage_experiment(truth, 100, 0.05, 99, 1), DomainError);
}

TEST_CASE("coverage is reproducible and independent of the thread count") {
  const ChannelTruth truth{{0.6, 1.01, 5.0}, {0.9, 1.02, 5.0}};
  const auto a = coverage_experiment(truth, 2000, 0.1, 200, 77, 1);
  const auto b = coverage_experiment(truth, 2000, 0.1, 200, 77, 4);
  CHECK(a.coverage == b.coverage);

  // Adding trials leaves the earlier ones untouched.
  const auto short_run = slope_z_scores(truth.alice, 500, 50, 5);
  const auto long_run = slope_z_scores(truth.alice, 500, 80, 5);
  CHECK(std::equal(short_run.begin(), short_run.end(), long_run.begin()));
}

TEST_CASE("estimator sampling laws") {
  const LinkTruth link{0.48, 1.0005, 1e3};
  const std::size_t m = 10000, trials = 2000;

  const auto z = slope_z_scores(link, m, trials, 21);
  CHECK(ks_statistic_normal(z) < ks_critical_1pct(trials));

  const auto chi2 = noise_chi2_statistics(link, m, trials, 22);
  const double mean = std::accumulate(chi2.begin(), chi2.end(), 0.0) / trials;
  const double se = std::sqrt(2.0 * (m - 1.0) / trials);
  CHECK(std::abs(mean - (m - 1.0)) < 3.0 * se);
}

TEST_CASE("KS statistic") {
  CHECK(ks_critical_1pct(10000) == doctest::Approx(0.01628));
  // A shifted sample is rejected.
  std::vector<double> shifted;
  GaussianStream g(3);
  for (int i = 0; i < 2000; ++i) shifted.push_back(g.next() + 0.2);
  CHECK(ks_statistic_normal(shifted) > ks_critical_1pct(shifted.size()));
  // Exact mid-point quantiles sit 1/(2n) from the CDF everywhere.
  std::vector<double> ideal;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    ideal.push_back(u < 0.5 ? -z_quantile(2.0 * u) : z_quantile(2.0 * (1.0 - u)));
  }
  CHECK(ks_statistic_normal(ideal) == doctest::Approx(0.5 / n).epsilon(1e-6));
}

TEST_CASE("sample dump format") {
  const auto s = generate_samples(0.5, 1.0, 2.0, 3, 4);
  std::ostringstream out;
  write_samples(out, s);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y");
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(std::getline(in, line));
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == s.x[i]);
    CHECK(std::stod(line.substr(comma + 1)) == s.y[i]);
  }
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("sampled estimates reproduce the theory-mode key sign") {
  ProtocolParams p;
  p.l_ac = 20.0;
  p.l_bc = 0.0;
  FiniteSizeParams fs;
  fs.n_total = 1e8;
  const auto truth = channel_truth(p);
  const bool theory_positive = finite_key_rate(p, fs).positive();

  const int trials = 8;
  int agree = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto a = estimate_streaming(truth.alice.t_prime, truth.alice.sigma2, truth.alice.v_mod,
                                      fs.m(), derive_seed(31, trial, 0));
    const auto b = estimate_streaming(truth.bob.t_prime, truth.bob.sigma2, truth.bob.v_mod, fs.m(),
                                      derive_seed(31, trial, 1));
    agree += finite_key_rate(p, fs, to_channel_estimate(a, b)).positive() == theory_positive ? 1 : 0;
  }
  CHECK(agree >= trials * 0.95);
}
