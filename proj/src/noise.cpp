#include "rkflab/noise.hpp"

#include <cmath>
#include <utility>

#include "rkflab/errors.hpp"

namespace rkflab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

NoiseSpec NoiseSpec::gaussian(Matrix scale) {
  NoiseSpec s;
  s.family = NoiseFamily::Gaussian;
  s.scale = std::move(scale);
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::gaussian_mixture(Matrix scale, double factor, double p_out) {
  NoiseSpec s;
  s.family = NoiseFamily::GaussianMixture;
  s.scale = std::move(scale);
  s.gm_factor = factor;
  s.gm_p_out = p_out;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::student_t(Matrix scale, double dof) {
  NoiseSpec s;
  s.family = NoiseFamily::StudentT;
  s.scale = std::move(scale);
  s.st_dof = dof;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::sg_alpha_s(Matrix scale, double alpha) {
  NoiseSpec s;
  s.family = NoiseFamily::SGalphaS;
  s.scale = std::move(scale);
  s.alpha = alpha;
  s.validate();
  return s;
}

void NoiseSpec::validate() const {
  if (scale.rows() == 0 || scale.rows() != scale.cols())
    throw DimensionMismatch("NoiseSpec: scale must be square and non-empty");
  Matrix lower;
  if (!cholesky(scale, lower)) throw DomainError("NoiseSpec: scale must be positive definite");
  switch (family) {
    case NoiseFamily::Gaussian:
      break;
    case NoiseFamily::GaussianMixture:
      if (!(gm_factor >= 1.0)) throw DomainError("NoiseSpec: GM factor must be >= 1");
      if (!(gm_p_out >= 0.0 && gm_p_out <= 1.0))
        throw DomainError("NoiseSpec: GM outlier probability must lie in [0,1]");
      break;
    case NoiseFamily::StudentT:
      if (!(st_dof > 0.0)) throw DomainError("NoiseSpec: StudentT dof must be positive");
      break;
    case NoiseFamily::SGalphaS:
      if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("NoiseSpec: alpha must lie in (0,2]");
      break;
  }
}

double stable_sample(double alpha, double beta, double gamma, double delta, RandomStream& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("stable_sample: alpha must lie in (0,2]");
  if (!(beta >= -1.0 && beta <= 1.0)) throw DomainError("stable_sample: beta must lie in [-1,1]");
  if (!(gamma > 0.0)) throw DomainError("stable_sample: gamma must be positive");
  if (alpha == 2.0) {
    // CMS is ill-conditioned at the boundary; S(2,.,gamma,delta) is exactly
    // N(delta, 2*gamma^2).
    return delta + gamma * std::sqrt(2.0) * rng.normal();
  }
  const double u = kPi * (rng.u01() - 0.5);  // Uniform(-pi/2, pi/2)
  const double w = rng.exponential();
  if (alpha == 1.0) {
    const double half_pi = 0.5 * kPi;
    const double z = (half_pi + beta * u) * std::tan(u) -
                     beta * std::log((half_pi * w * std::cos(u)) / (half_pi + beta * u));
    return gamma * (2.0 / kPi) * z + (2.0 / kPi) * beta * gamma * std::log(gamma) + delta;
  }
  const double tan_half = std::tan(0.5 * kPi * alpha);
  const double b = std::atan(beta * tan_half) / alpha;
  const double s = std::pow(1.0 + beta * beta * tan_half * tan_half, 1.0 / (2.0 * alpha));
  const double z = s * std::sin(alpha * (u + b)) / std::pow(std::cos(u), 1.0 / alpha) *
                   std::pow(std::cos(u - alpha * (u + b)) / w, (1.0 - alpha) / alpha);
  return gamma * z + delta;
}

double mixing_scalar(const NoiseSpec& spec, RandomStream& rng) {
  switch (spec.family) {
    case NoiseFamily::Gaussian:
      return 1.0;
    case NoiseFamily::GaussianMixture:
      return rng.u01() < spec.gm_p_out ? spec.gm_factor : 1.0;
    case NoiseFamily::StudentT: {
      const double w = rng.gamma(0.5 * spec.st_dof, 0.5 * spec.st_dof);
      return 1.0 / w;
    }
    case NoiseFamily::SGalphaS: {
      if (spec.alpha == 2.0) return 2.0;  // exact boundary: N(0, 2*scale)
      const double g = 2.0 * std::pow(std::cos(kPi * spec.alpha / 4.0), 2.0 / spec.alpha);
      return stable_sample(0.5 * spec.alpha, 1.0, g, 0.0, rng);
    }
  }
  throw DomainError("mixing_scalar: unknown family");
}

Vector sample_noise_with(const NoiseSpec& spec, const Matrix& scale_chol, double mix,
                         const Vector& g) {
  const int m = spec.scale.rows();
  const double root = std::sqrt(mix);
  Vector out(m);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int k = 0; k <= i; ++k) acc += scale_chol(i, k) * g[k];
    out[i] = root * acc;
  }
  return out;
}

Vector sample_noise(const NoiseSpec& spec, RandomStream& rng) {
  const int m = spec.scale.rows();
  Matrix lower;
  if (!cholesky(spec.scale, lower)) throw DomainError("sample_noise: scale not positive definite");
  const double mix = mixing_scalar(spec, rng);
  Vector g(m);
  for (int i = 0; i < m; ++i) g[i] = rng.normal();
  return sample_noise_with(spec, lower, mix, g);
}

Matrix true_covariance(const NoiseSpec& spec) {
  switch (spec.family) {
    case NoiseFamily::Gaussian:
      return spec.scale;
    case NoiseFamily::GaussianMixture:
      return mat_scale(spec.scale, (1.0 - spec.gm_p_out) + spec.gm_p_out * spec.gm_factor);
    case NoiseFamily::StudentT:
      if (spec.st_dof <= 2.0)
        throw InfiniteVariance("true_covariance: StudentT with dof <= 2 has no covariance");
      return mat_scale(spec.scale, spec.st_dof / (spec.st_dof - 2.0));
    case NoiseFamily::SGalphaS:
      if (spec.alpha < 2.0)
        throw InfiniteVariance("true_covariance: SGalphaS with alpha < 2 has no covariance");
      return mat_scale(spec.scale, 2.0);  // boundary convention, see NoiseSpec
  }
  throw DomainError("true_covariance: unknown family");
}

}  // namespace rkflab
