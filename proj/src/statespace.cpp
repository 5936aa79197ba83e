#include "rkflab/statespace.hpp"

#include <cmath>

#include "rkflab/errors.hpp"

namespace rkflab {

bool GaussianBelief::valid(double rel_tol) const {
  const int n = mean.size();
  if (cov.rows() != n || cov.cols() != n) return false;
  if (!all_finite(mean) || !all_finite(cov)) return false;
  double tr = 0.0;
  for (int i = 0; i < n; ++i) {
    tr += cov(i, i);
    for (int j = 0; j < n; ++j)
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-9 * std::max(1.0, std::abs(cov(i, j)))) return false;
  }
  return min_eigen_sym(cov) >= -rel_tol * std::max(tr, 1.0);
}

StateSpaceModel cv_model(double dt) {
  if (!(dt > 0.0)) throw DomainError("cv_model: dt must be positive");
  StateSpaceModel model;
  model.n = 4;
  model.m = 2;
  model.F = Matrix::identity(4);
  model.F(0, 2) = dt;
  model.F(1, 3) = dt;
  model.H = Matrix(2, 4, 0.0);
  model.H(0, 0) = 1.0;
  model.H(1, 1) = 1.0;
  const double q = 0.1;
  const double a = q * dt * dt * dt / 3.0;
  const double b = q * dt * dt / 2.0;
  const double c = q * dt;
  model.Q = Matrix(4, 4, 0.0);
  model.Q(0, 0) = a;
  model.Q(1, 1) = a;
  model.Q(2, 2) = c;
  model.Q(3, 3) = c;
  model.Q(0, 2) = b;
  model.Q(2, 0) = b;
  model.Q(1, 3) = b;
  model.Q(3, 1) = b;
  return model;
}

GaussianBelief predict(const GaussianBelief& belief, const StateSpaceModel& model) {
  // Symmetric congruence: only the upper triangle is computed and mirrored,
  // which keeps 100-step covariance recursions symmetric to the last bit.
  GaussianBelief out;
  out.mean = affine_map(model.F, belief.mean, nullptr);
  out.cov = congruence_const(model.F, belief.cov, &model.Q);
  return out;
}

Trajectory simulate(const StateSpaceModel& model, const GaussianBelief& init,
                    const NoiseSpec& noise, int T, RandomStream& rng) {
  if (T < 1) throw DomainError("simulate: T must be >= 1");
  const int n = model.n;
  const Matrix init_chol = cholesky_psd(init.cov);
  const Matrix q_chol = cholesky_psd(model.Q);

  auto gaussian_vec = [&](const Matrix& lower) {
    Vector g(n);
    for (int i = 0; i < n; ++i) g[i] = rng.normal();
    Vector out(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = 0; k <= i; ++k) acc += lower(i, k) * g[k];
      out[i] = acc;
    }
    return out;
  };

  Trajectory traj;
  traj.states.reserve(T);
  traj.observations.reserve(T);
  Vector x = vec_add(init.mean, gaussian_vec(init_chol));
  for (int k = 0; k < T; ++k) {
    x = vec_add(mat_vec(model.F, x), gaussian_vec(q_chol));
    Vector z = vec_add(mat_vec(model.H, x), sample_noise(noise, rng));
    traj.states.push_back(x);
    traj.observations.push_back(z);
  }
  return traj;
}

}  // namespace rkflab
