#ifndef RKFLAB_FILTERS_HPP_
#define RKFLAB_FILTERS_HPP_

#include <vector>

#include "rkflab/mat.hpp"
#include "rkflab/noise.hpp"
#include "rkflab/statespace.hpp"

namespace rkflab {

struct KfUpdateResult {
  GaussianBelief posterior;
  Matrix gain;            // n x m
  Vector innovation;      // m
  Matrix innovation_cov;  // m x m
};

/// Fixed-point iteration controls of the variational filters.
struct FixedPointControl {
  int max_iters = 50;
  double tol = 1e-2;
  int window = 4;  // number of latest iterate changes inspected

  void validate() const;
};

/// One KF measurement update with effective measurement covariance `r_eff`.
/// Throws SingularInnovation if H P H^T + r_eff resists the jitter policy.
KfUpdateResult kf_update(const GaussianBelief& pred, const Vector& z, const Matrix& r_eff,
                         const StateSpaceModel& model);

/// predict + kf_update over a trajectory with a fixed effective covariance.
std::vector<GaussianBelief> kf_filter(const StateSpaceModel& model, const Matrix& r_eff,
                                      const Trajectory& traj, const GaussianBelief& init);

/// Standard KF running on the noise family's true total covariance.
/// Propagates InfiniteVariance where that covariance does not exist.
std::vector<GaussianBelief> kftncm_filter(const StateSpaceModel& model, const NoiseSpec& noise,
                                          const Trajectory& traj, const GaussianBelief& init);

/// Variational Student-t robust update: alternates the KF update with the
/// mixing-weight refresh E[1/lambda] <- (v + m) / (v + tr(D R^-1)) until the
/// posterior mean settles. Returns the last iterate.
KfUpdateResult vb_rkf_step(const GaussianBelief& pred, const Vector& z, const Matrix& r_scale,
                           double dof, const FixedPointControl& ctrl,
                           const StateSpaceModel& model);

std::vector<GaussianBelief> vb_rkf_filter(const StateSpaceModel& model, const Matrix& r_scale,
                                          double dof, const FixedPointControl& ctrl,
                                          const Trajectory& traj, const GaussianBelief& init);

// ---------------------------------------------------------------------------
// Quadrature oracle for E[1/lambda] under the exact mixing density.

struct MixingSpec {
  enum class Kind { PointMass, Discrete, InverseGamma };
  Kind kind = Kind::PointMass;
  double point = 1.0;                   // PointMass
  std::vector<double> lambdas, weights; // Discrete
  double ig_shape = 1.5, ig_rate = 1.5; // InverseGamma(shape, rate)

  static MixingSpec point_mass(double lambda);
  static MixingSpec discrete(std::vector<double> lambdas, std::vector<double> weights);
  static MixingSpec inverse_gamma(double shape, double rate);

  /// Exact mixing density of a noise family; GM and ST (and Gaussian as a
  /// point mass) are representable, SGalphaS is not.
  static MixingSpec from_noise(const NoiseSpec& spec);
};

/// Posterior expectation of 1/lambda under
///   p(lambda | z) proportional to N(innovation; 0, s0 + lambda R) pi(lambda).
/// Discrete mixings reduce to the exact finite sum; the inverse-gamma mixing
/// uses a 2000-node log-grid with log-sum-exp normalization.
double oracle_e_inv_lambda(const Vector& innovation, const Matrix& s0, const Matrix& r,
                           const MixingSpec& mixing);

/// Ideal mixing-aware filter: at each step divides the nominal scale by the
/// quadrature value of E[1/lambda] and applies the KF update.
std::vector<GaussianBelief> oracle_filter(const StateSpaceModel& model, const NoiseSpec& noise,
                                          const Trajectory& traj, const GaussianBelief& init,
                                          const Matrix& r_nominal);

}  // namespace rkflab

#endif  // RKFLAB_FILTERS_HPP_
