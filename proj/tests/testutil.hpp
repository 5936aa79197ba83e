#ifndef RKFLAB_TESTS_TESTUTIL_HPP_
#define RKFLAB_TESTS_TESTUTIL_HPP_

// Shared oracles for the unit and acceptance suites. Everything here is
// independent of the library code paths it is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "rkflab/mat.hpp"
#include "rkflab/rng.hpp"

namespace rkflab::testutil {

struct ScalarPosterior {
  double mean;
  double var;
};

// Brute-force Bayesian posterior of a scalar Gaussian system by grid
// quadrature: prior N(mu, p), likelihood N(z; h x, r).
inline ScalarPosterior scalar_grid_posterior(double mu, double p, double h, double r, double z) {
  const double sd = std::sqrt(p);
  const double lo = mu - 12.0 * sd - 12.0 * std::sqrt(r) / std::max(std::abs(h), 1e-6);
  const double hi = mu + 12.0 * sd + 12.0 * std::sqrt(r) / std::max(std::abs(h), 1e-6);
  const int n = 200001;
  const double step = (hi - lo) / (n - 1);
  double w_sum = 0.0, x_sum = 0.0, xx_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * step;
    const double dp = x - mu;
    const double dl = z - h * x;
    const double log_w = -0.5 * (dp * dp / p + dl * dl / r);
    const double w = std::exp(log_w);
    w_sum += w;
    x_sum += w * x;
    xx_sum += w * x * x;
  }
  const double mean = x_sum / w_sum;
  return {mean, xx_sum / w_sum - mean * mean};
}

// Central finite-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step = 1e-6) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double hi = f(x);
    x[i] = keep - step;
    const double lo = f(x);
    x[i] = keep;
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

inline bool grad_close(double got, double want, double rel_tol = 1e-4, double abs_tol = 1e-8) {
  if (std::abs(want) < 1e-6) return std::abs(got - want) <= abs_tol;
  return std::abs(got - want) <= rel_tol * std::abs(want);
}

inline Matrix random_spd(int n, RandomStream& rng, double ridge = 0.5) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Matrix spd = mat_mul(a, transpose(a));
  for (int i = 0; i < n; ++i) spd(i, i) += ridge;
  return spd;
}

}  // namespace rkflab::testutil

#endif  // RKFLAB_TESTS_TESTUTIL_HPP_
