#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rkflab/noise.hpp"
#include "rkflab/rng.hpp"

using namespace rkflab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix iso_scale(int m, double c) {
  Matrix s(m, m, 0.0);
  for (int i = 0; i < m; ++i) s(i, i) = c;
  return s;
}

Matrix empirical_cov(const NoiseSpec& spec, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  const int m = spec.scale.rows();
  Matrix acc(m, m, 0.0);
  for (int i = 0; i < n; ++i) {
    const Vector v = sample_noise(spec, rng);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) acc(a, b) += v[a] * v[b];
  }
  return mat_scale(acc, 1.0 / n);
}

// Stable CDF in the 1-parameterization by numerically inverting the
// characteristic function (Gil-Pelaez):
//   F(x) = 1/2 - (1/pi) Int_0^inf exp(-(g t)^a) sin(b tan(pi a/2) (g t)^a - x t) / t dt.
double stable_cdf(double x, double alpha, double beta, double gamma) {
  const double skew = beta * std::tan(0.5 * kPi * alpha);
  const double t_hi = 30.0 / gamma;
  const int n = 60000;  // Simpson grid (even)
  const double h = t_hi / n;
  auto integrand = [&](double t) {
    if (t <= 0.0) return skew == 0.0 ? -x : (alpha > 1.0 ? -x : 0.0);
    const double ga = std::pow(gamma * t, alpha);
    return std::exp(-ga) * std::sin(skew * ga - x * t) / t;
  };
  double sum = integrand(0.0) + integrand(t_hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i * h);
  return 0.5 - (h / 3.0) * sum / kPi;
}

// Largest deviation between the empirical CDF and the oracle on a grid of
// sample quantiles.
double grid_ks(std::vector<double> samples, double alpha, double beta, double gamma) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  double worst = 0.0;
  for (int q = 1; q < 1000; ++q) {
    const std::size_t idx = static_cast<std::size_t>(q / 1000.0 * n);
    const double x = samples[idx];
    const double emp = static_cast<double>(idx + 1) / n;
    worst = std::max(worst, std::abs(emp - stable_cdf(x, alpha, beta, gamma)));
  }
  return worst;
}

}  // namespace

TEST_CASE("GM with U=1 never inflates") {
  const NoiseSpec spec = NoiseSpec::gaussian_mixture(iso_scale(2, 10.0), 1.0);
  RandomStream rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(mixing_scalar(spec, rng) == 1.0);
}

TEST_CASE("GM empirical covariance matches the total-variance formula") {
  const NoiseSpec spec = NoiseSpec::gaussian_mixture(iso_scale(2, 10.0), 100.0, 0.1);
  const Matrix cov = empirical_cov(spec, 1000000, 11);
  // (0.9 * 10 + 0.1 * 1000) I = 109 I
  CHECK(cov(0, 0) == doctest::Approx(109.0).epsilon(0.05));
  CHECK(cov(1, 1) == doctest::Approx(109.0).epsilon(0.05));
  CHECK(std::abs(cov(0, 1)) < 3.0);
}

TEST_CASE("Student-t empirical covariance carries the dof factor") {
  const NoiseSpec spec = NoiseSpec::student_t(iso_scale(2, 10.0), 6.0);
  const Matrix cov = empirical_cov(spec, 1000000, 12);
  // v/(v-2) * 10 = 15
  CHECK(cov(0, 0) == doctest::Approx(15.0).epsilon(0.05));
  CHECK(cov(1, 1) == doctest::Approx(15.0).epsilon(0.05));
}

TEST_CASE("true covariance where defined, InfiniteVariance elsewhere") {
  const Matrix r = iso_scale(2, 10.0);
  CHECK(true_covariance(NoiseSpec::gaussian(r))(0, 0) == 10.0);
  const Matrix gm = true_covariance(NoiseSpec::gaussian_mixture(r, 100.0, 0.1));
  CHECK(gm(0, 0) == doctest::Approx(109.0).epsilon(1e-12));
  CHECK(gm(0, 1) == 0.0);
  const Matrix st = true_covariance(NoiseSpec::student_t(r, 6.0));
  CHECK(st(1, 1) == doctest::Approx(15.0).epsilon(1e-12));
  CHECK_THROWS_AS(true_covariance(NoiseSpec::student_t(r, 2.0)), InfiniteVariance);
  CHECK_THROWS_AS(true_covariance(NoiseSpec::sg_alpha_s(r, 0.7)), InfiniteVariance);
}

TEST_CASE("stable alpha=2 is Gaussian with variance 2 gamma^2") {
  RandomStream rng(21);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = stable_sample(2.0, 0.0, 1.0, 0.0, rng);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(var >= 1.98);
  CHECK(var <= 2.02);
}

TEST_CASE("stable alpha=1 beta=0 has Cauchy quartiles") {
  RandomStream rng(22);
  const int n = 1000000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = stable_sample(1.0, 0.0, 1.0, 0.0, rng);
  std::sort(xs.begin(), xs.end());
  CHECK(xs[n / 4] == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(xs[3 * n / 4] == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("stable sampler matches the CDF oracle (alpha=1.5, beta=1)") {
  RandomStream rng(23);
  const int n = 1000000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = stable_sample(1.5, 1.0, 1.0, 0.0, rng);
  CHECK(grid_ks(std::move(xs), 1.5, 1.0, 1.0) < 0.002);
}

TEST_CASE("stable parameter domain") {
  RandomStream rng(1);
  CHECK_THROWS_AS(stable_sample(0.0, 0.0, 1.0, 0.0, rng), DomainError);
  CHECK_THROWS_AS(stable_sample(2.1, 0.0, 1.0, 0.0, rng), DomainError);
  CHECK_THROWS_AS(stable_sample(1.0, 1.5, 1.0, 0.0, rng), DomainError);
  CHECK_THROWS_AS(stable_sample(1.0, 0.0, 0.0, 0.0, rng), DomainError);
}

TEST_CASE("SGalphaS marginal is symmetric alpha-stable with scale sqrt(R11)") {
  const NoiseSpec spec = NoiseSpec::sg_alpha_s(iso_scale(2, 10.0), 1.5);
  RandomStream rng(24);
  const int n = 500000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = sample_noise(spec, rng)[0];
  CHECK(grid_ks(std::move(xs), 1.5, 0.0, std::sqrt(10.0)) < 0.003);
}

TEST_CASE("noise families are symmetric: odd in the Gaussian vector, near-zero mean") {
  const Matrix r = iso_scale(2, 10.0);
  const std::vector<NoiseSpec> specs = {
      NoiseSpec::gaussian(r), NoiseSpec::gaussian_mixture(r, 100.0, 0.1),
      NoiseSpec::student_t(r, 3.0), NoiseSpec::sg_alpha_s(r, 1.5)};
  Matrix lower;
  REQUIRE(cholesky(r, lower));
  RandomStream rng(31);
  for (const NoiseSpec& spec : specs) {
    for (int trial = 0; trial < 200; ++trial) {
      const double mix = mixing_scalar(spec, rng);
      Vector g(2), neg(2);
      for (int i = 0; i < 2; ++i) {
        g[i] = rng.normal();
        neg[i] = -g[i];
      }
      const Vector a = sample_noise_with(spec, lower, mix, g);
      const Vector b = sample_noise_with(spec, lower, mix, neg);
      for (int i = 0; i < 2; ++i) CHECK(a[i] == -b[i]);
    }
    const int n = 1000000;
    RandomStream mean_rng(32);
    double sum[2] = {0.0, 0.0};
    double sum2[2] = {0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const Vector v = sample_noise(spec, mean_rng);
      for (int c = 0; c < 2; ++c) {
        sum[c] += v[c];
        sum2[c] += v[c] * v[c];
      }
    }
    for (int c = 0; c < 2; ++c) {
      const double mean = sum[c] / n;
      const double sd = std::sqrt(sum2[c] / n - mean * mean);
      CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
    }
  }
}

TEST_CASE("SGalphaS draws are elliptically contoured (uniform angle)") {
  const NoiseSpec spec = NoiseSpec::sg_alpha_s(iso_scale(2, 10.0), 1.5);
  RandomStream rng(41);
  const int n = 1000000;
  const int bins = 36;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < n; ++i) {
    const Vector v = sample_noise(spec, rng);
    double angle = std::atan2(v[1], v[0]);
    if (angle < 0.0) angle += 2.0 * kPi;
    ++counts[std::min(bins - 1, static_cast<int>(angle / (2.0 * kPi) * bins))];
  }
  const double expect = static_cast<double>(n) / bins;
  double stat = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double d = counts[b] - expect;
    stat += d * d / expect;
  }
  CHECK(stat < 66.62);  // chi-square 0.999 quantile, 35 dof
}

TEST_CASE("Hill tail index recovers alpha") {
  for (const double alpha : {0.9, 1.5}) {
    const NoiseSpec spec = NoiseSpec::sg_alpha_s(iso_scale(2, 10.0), alpha);
    RandomStream rng(51);
    const int n = 1000000;
    std::vector<double> mags(n);
    for (int i = 0; i < n; ++i) mags[i] = std::abs(sample_noise(spec, rng)[0]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    const int k = n / 100;  // top 1%
    double acc = 0.0;
    for (int i = 0; i < k; ++i) acc += std::log(mags[i] / mags[k]);
    const double hill = k / acc;
    CHECK(hill == doctest::Approx(alpha).epsilon(0.15 / alpha));
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(NoiseSpec::gaussian_mixture(iso_scale(2, 10.0), 0.5), DomainError);
  CHECK_THROWS_AS(NoiseSpec::gaussian_mixture(iso_scale(2, 10.0), 10.0, 1.5), DomainError);
  CHECK_THROWS_AS(NoiseSpec::student_t(iso_scale(2, 10.0), 0.0), DomainError);
  CHECK_THROWS_AS(NoiseSpec::sg_alpha_s(iso_scale(2, 10.0), 2.5), DomainError);
  Matrix indefinite(2, 2, 0.0);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(NoiseSpec::gaussian(indefinite), DomainError);
}
