#ifndef RKFLAB_STATESPACE_HPP_
#define RKFLAB_STATESPACE_HPP_

#include <vector>

#include "rkflab/mat.hpp"
#include "rkflab/noise.hpp"
#include "rkflab/rng.hpp"

namespace rkflab {

/// Linear time-invariant state-space model x_k = F x_{k-1} + w, z_k = H x_k + v.
struct StateSpaceModel {
  Matrix F;  // n x n state transition
  Matrix H;  // m x n measurement
  Matrix Q;  // n x n process-noise covariance
  int n = 0;
  int m = 0;
};

struct GaussianBelief {
  Vector mean;
  Matrix cov;

  /// Symmetry plus eigenvalues >= -1e-9 * trace.
  bool valid(double rel_tol = 1e-9) const;
};

/// True states and their measurements, k = 1..T.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> observations;

  int length() const { return static_cast<int>(states.size()); }
};

/// Planar constant-velocity tracking model: state (x, y, vx, vy), position
/// measurements, discretized white-noise-acceleration process noise.
StateSpaceModel cv_model(double dt);

/// Time update: mean' = F mean, cov' = F cov F^T + Q (re-symmetrized).
GaussianBelief predict(const GaussianBelief& belief, const StateSpaceModel& model);

/// Rolls the model forward T steps from a draw of `init`, sampling process
/// noise from N(0, Q) and measurement noise from `noise`.
Trajectory simulate(const StateSpaceModel& model, const GaussianBelief& init,
                    const NoiseSpec& noise, int T, RandomStream& rng);

}  // namespace rkflab

#endif  // RKFLAB_STATESPACE_HPP_
