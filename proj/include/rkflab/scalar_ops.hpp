#ifndef RKFLAB_SCALAR_OPS_HPP_
#define RKFLAB_SCALAR_OPS_HPP_

// Scalar nonlinearities shared between the plain double path and the tape.
// The double versions here define the reference semantics; the Var overloads
// (autodiff.hpp) compute the same values plus the local partials.

#include <cmath>

#include "rkflab/errors.hpp"
#include "rkflab/special.hpp"

namespace rkflab {

inline double value_of(double x) { return x; }

inline constexpr double kExpClampLo = -30.0;
inline constexpr double kExpClampHi = 30.0;
inline constexpr double kLeakySlope = 0.1;

/// exp with the argument clamped to [-30, 30].
inline double exp_clamped(double x) {
  return std::exp(x < kExpClampLo ? kExpClampLo : (x > kExpClampHi ? kExpClampHi : x));
}

/// sgn(x) * log(1 + |x|): odd, monotone, bounded-growth squashing.
inline double shrink(double x) {
  return x >= 0.0 ? std::log1p(x) : -std::log1p(-x);
}

inline double leaky_relu(double x) { return x > 0.0 ? x : kLeakySlope * x; }

inline double lgamma(double x) { return lgamma_lanczos(x); }

/// Negative log density of the univariate Student-t with dof v and scale
/// sigma, evaluated in log domain.
template <class S>
S st_nll(const S& x, const S& v, const S& sigma) {
  using std::log;
  using std::log1p;
  if (!(value_of(v) > 0.0) || !(value_of(sigma) > 0.0))
    throw DomainError("st_nll: dof and scale must be positive");
  constexpr double pi = 3.14159265358979323846;
  const S half_v = v * 0.5;
  const S half_vp1 = half_v + 0.5;
  const S u = x / sigma;
  const S q = u * u / v;
  return -(lgamma(half_vp1) - lgamma(half_v) - 0.5 * log(v * pi) - log(sigma) -
           half_vp1 * log1p(q));
}

}  // namespace rkflab

#endif  // RKFLAB_SCALAR_OPS_HPP_
