#include "rkflab/special.hpp"

#include <cmath>

#include "rkflab/errors.hpp"

namespace rkflab {

namespace {

constexpr double kPi = 3.14159265358979323846;

const double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

double lgamma_lanczos(double x) {
  if (!(x > 0.0)) throw DomainError("lgamma: argument must be positive");
  if (x < 0.5) {
    // Reflection keeps the series argument away from the poles.
    return std::log(kPi / std::sin(kPi * x)) - lgamma_lanczos(1.0 - x);
  }
  const double z = x - 1.0;
  double acc = kLanczos[0];
  for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(acc);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series truncated at x^-8; |error| < 1e-13 for x >= 6.
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

}  // namespace rkflab
