#ifndef RKFLAB_SPECIAL_HPP_
#define RKFLAB_SPECIAL_HPP_

namespace rkflab {

// Log-gamma via the Lanczos approximation (g = 7, 9 coefficients).
// Both the plain and the autodiff evaluation path call this one routine, so
// the two paths produce bit-identical values. Throws DomainError for x <= 0.
double lgamma_lanczos(double x);

// Digamma (derivative of lgamma_lanczos for tape partials). Recurrence below
// x = 6, then the asymptotic series. Throws DomainError for x <= 0.
double digamma(double x);

}  // namespace rkflab

#endif  // RKFLAB_SPECIAL_HPP_
