#ifndef RKFLAB_NOISE_HPP_
#define RKFLAB_NOISE_HPP_

#include <cstdint>

#include "rkflab/mat.hpp"
#include "rkflab/rng.hpp"

namespace rkflab {

enum class NoiseFamily : std::uint8_t { Gaussian, GaussianMixture, StudentT, SGalphaS };

/// Measurement-noise family with its nominal scale matrix. Every family is a
/// Gaussian scale mixture: a draw is sqrt(mix) * chol(scale) * g with g ~ N(0, I)
/// and `mix` the family-specific mixing scalar.
///
/// SGalphaS convention: mix ~ S(alpha/2, 1, 2*cos(pi*alpha/4)^(2/alpha), 0), so
/// the characteristic function is exp(-(t^T scale t)^(alpha/2)) and the
/// alpha -> 2 limit is N(0, 2*scale), not N(0, scale).
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Gaussian;
  Matrix scale;          // nominal scale matrix, m x m, symmetric positive definite
  double gm_factor = 1.0;   // GM: outlier covariance augmentation U >= 1
  double gm_p_out = 0.1;    // GM: outlier probability
  double st_dof = 3.0;      // StudentT: degrees of freedom v > 0
  double alpha = 1.5;       // SGalphaS: characteristic exponent in (0, 2]

  static NoiseSpec gaussian(Matrix scale);
  static NoiseSpec gaussian_mixture(Matrix scale, double factor, double p_out = 0.1);
  static NoiseSpec student_t(Matrix scale, double dof);
  static NoiseSpec sg_alpha_s(Matrix scale, double alpha);

  void validate() const;
};

/// One draw of the mixing scalar (1 for Gaussian; 1 or U for GM; 1/w with
/// w ~ Gamma(v/2, v/2) for ST; the skewed-stable scalar for SGalphaS).
double mixing_scalar(const NoiseSpec& spec, RandomStream& rng);

/// sqrt(mix) * L * g for a given mixing scalar and standard-normal vector;
/// odd in g by construction. L is the lower Cholesky factor of spec.scale.
Vector sample_noise_with(const NoiseSpec& spec, const Matrix& scale_chol, double mix,
                         const Vector& g);

/// One measurement-noise draw.
Vector sample_noise(const NoiseSpec& spec, RandomStream& rng);

/// One draw from the univariate stable law S(alpha, beta, gamma, delta) in the
/// 1-parameterization (Chambers-Mallows-Stuck; alpha = 2 routes to the exact
/// Gaussian branch, alpha = 1 uses the dedicated CMS branch).
double stable_sample(double alpha, double beta, double gamma, double delta, RandomStream& rng);

/// Total covariance of the family where it exists; throws InfiniteVariance for
/// SGalphaS with alpha < 2 and StudentT with v <= 2.
Matrix true_covariance(const NoiseSpec& spec);

}  // namespace rkflab

#endif  // RKFLAB_NOISE_HPP_
