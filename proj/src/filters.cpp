#include "rkflab/filters.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <utility>

#include "rkflab/errors.hpp"
#include "rkflab/kf_core.hpp"
#include "rkflab/special.hpp"

namespace rkflab {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

double log_gaussian(const Vector& x, const Matrix& cov) {
  const int m = x.size();
  Matrix lower;
  if (!cholesky(cov, lower)) throw QuadratureFailure("log_gaussian: covariance not PD");
  double log_det = 0.0;
  for (int i = 0; i < m; ++i) log_det += 2.0 * std::log(lower(i, i));
  const Vector sol = chol_solve(lower, x);
  return -0.5 * (m * kLog2Pi + log_det + dot(x, sol));
}

double log_sum_exp(const std::vector<double>& terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

}  // namespace

void FixedPointControl::validate() const {
  if (max_iters < 1) throw DomainError("FixedPointControl: max_iters must be >= 1");
  if (!(tol > 0.0)) throw DomainError("FixedPointControl: tol must be positive");
  if (window < 1) throw DomainError("FixedPointControl: window must be >= 1");
}

KfUpdateResult kf_update(const GaussianBelief& pred, const Vector& z, const Matrix& r_eff,
                         const StateSpaceModel& model) {
  KfStep<double> step = kf_core(pred.mean, pred.cov, z, r_eff, model.H);
  return KfUpdateResult{GaussianBelief{std::move(step.mean), std::move(step.cov)},
                        std::move(step.gain), std::move(step.innovation),
                        std::move(step.innovation_cov)};
}

std::vector<GaussianBelief> kf_filter(const StateSpaceModel& model, const Matrix& r_eff,
                                      const Trajectory& traj, const GaussianBelief& init) {
  std::vector<GaussianBelief> out;
  out.reserve(traj.length());
  GaussianBelief belief = init;
  for (int k = 0; k < traj.length(); ++k) {
    belief = kf_update(predict(belief, model), traj.observations[k], r_eff, model).posterior;
    out.push_back(belief);
  }
  return out;
}

std::vector<GaussianBelief> kftncm_filter(const StateSpaceModel& model, const NoiseSpec& noise,
                                          const Trajectory& traj, const GaussianBelief& init) {
  return kf_filter(model, true_covariance(noise), traj, init);
}

KfUpdateResult vb_rkf_step(const GaussianBelief& pred, const Vector& z, const Matrix& r_scale,
                           double dof, const FixedPointControl& ctrl,
                           const StateSpaceModel& model) {
  if (!(dof > 0.0)) throw DomainError("vb_rkf_step: dof must be positive");
  ctrl.validate();
  const int m = model.m;
  const Matrix r_chol = cholesky_with_jitter(r_scale);

  double e_inv = 1.0;
  KfUpdateResult result;
  Vector prev_mean;
  std::deque<double> changes;
  for (int iter = 0; iter < ctrl.max_iters; ++iter) {
    result = kf_update(pred, z, mat_scale(r_scale, 1.0 / e_inv), model);
    if (iter > 0) {
      const double rel = norm2(vec_sub(result.posterior.mean, prev_mean)) /
                         std::max(norm2(result.posterior.mean), 1e-12);
      changes.push_back(rel);
      if (static_cast<int>(changes.size()) > ctrl.window) changes.pop_front();
      if (static_cast<int>(changes.size()) >= ctrl.window) {
        double worst = 0.0;
        for (double c : changes) worst = std::max(worst, c);
        if (worst < ctrl.tol) break;
      }
    }
    prev_mean = result.posterior.mean;
    // D = post-fit residual outer product + projected posterior covariance
    const Vector residual = vec_sub(z, mat_vec(model.H, result.posterior.mean));
    Matrix d(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) d(i, j) = residual[i] * residual[j];
    d = mat_add(d, congruence_const(model.H, result.posterior.cov, nullptr));
    double tr_dr = 0.0;
    for (int j = 0; j < m; ++j) {
      Vector col(m);
      for (int i = 0; i < m; ++i) col[i] = d(i, j);
      tr_dr += chol_solve(r_chol, col)[j];  // (R^-1 D)_jj = (D R^-1)_jj, D, R symmetric
    }
    e_inv = (dof + m) / (dof + tr_dr);
  }
  return result;
}

std::vector<GaussianBelief> vb_rkf_filter(const StateSpaceModel& model, const Matrix& r_scale,
                                          double dof, const FixedPointControl& ctrl,
                                          const Trajectory& traj, const GaussianBelief& init) {
  std::vector<GaussianBelief> out;
  out.reserve(traj.length());
  GaussianBelief belief = init;
  for (int k = 0; k < traj.length(); ++k) {
    belief =
        vb_rkf_step(predict(belief, model), traj.observations[k], r_scale, dof, ctrl, model)
            .posterior;
    out.push_back(belief);
  }
  return out;
}

MixingSpec MixingSpec::point_mass(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("MixingSpec: point mass must be positive");
  MixingSpec s;
  s.kind = Kind::PointMass;
  s.point = lambda;
  return s;
}

MixingSpec MixingSpec::discrete(std::vector<double> lambdas, std::vector<double> weights) {
  if (lambdas.empty() || lambdas.size() != weights.size())
    throw DomainError("MixingSpec: discrete mixing needs matched atoms and weights");
  MixingSpec s;
  s.kind = Kind::Discrete;
  s.lambdas = std::move(lambdas);
  s.weights = std::move(weights);
  return s;
}

MixingSpec MixingSpec::inverse_gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw DomainError("MixingSpec: inverse-gamma parameters must be positive");
  MixingSpec s;
  s.kind = Kind::InverseGamma;
  s.ig_shape = shape;
  s.ig_rate = rate;
  return s;
}

MixingSpec MixingSpec::from_noise(const NoiseSpec& spec) {
  switch (spec.family) {
    case NoiseFamily::Gaussian:
      return point_mass(1.0);
    case NoiseFamily::GaussianMixture:
      return discrete({1.0, spec.gm_factor}, {1.0 - spec.gm_p_out, spec.gm_p_out});
    case NoiseFamily::StudentT:
      return inverse_gamma(0.5 * spec.st_dof, 0.5 * spec.st_dof);
    case NoiseFamily::SGalphaS:
      throw DomainError("MixingSpec: SGalphaS has no representable mixing density here");
  }
  throw DomainError("MixingSpec: unknown family");
}

double oracle_e_inv_lambda(const Vector& innovation, const Matrix& s0, const Matrix& r,
                           const MixingSpec& mixing) {
  const auto log_like = [&](double lambda) {
    Matrix cov = mat_add(s0, mat_scale(r, lambda));
    return log_gaussian(innovation, cov);
  };
  switch (mixing.kind) {
    case MixingSpec::Kind::PointMass:
      return 1.0 / mixing.point;
    case MixingSpec::Kind::Discrete: {
      std::vector<double> log_num, log_den;
      for (std::size_t i = 0; i < mixing.lambdas.size(); ++i) {
        if (mixing.weights[i] <= 0.0) continue;
        const double term = std::log(mixing.weights[i]) + log_like(mixing.lambdas[i]);
        log_den.push_back(term);
        log_num.push_back(term - std::log(mixing.lambdas[i]));
      }
      const double den = log_sum_exp(log_den);
      if (!std::isfinite(den))
        throw QuadratureFailure("oracle_e_inv_lambda: discrete normalizer underflowed");
      return std::exp(log_sum_exp(log_num) - den);
    }
    case MixingSpec::Kind::InverseGamma: {
      // 2000 log-spaced nodes on [1e-6, 1e6]; trapezoid in u = log(lambda)
      // with the Jacobian folded into the integrand.
      constexpr int kNodes = 2000;
      const double u_lo = std::log(1e-6);
      const double u_hi = std::log(1e6);
      const double h = (u_hi - u_lo) / (kNodes - 1);
      const double a = mixing.ig_shape;
      const double b = mixing.ig_rate;
      const double log_norm_const = a * std::log(b) - lgamma_lanczos(a);
      std::vector<double> log_num, log_den;
      log_num.reserve(kNodes);
      log_den.reserve(kNodes);
      for (int i = 0; i < kNodes; ++i) {
        const double u = u_lo + h * i;
        const double lambda = std::exp(u);
        double term = log_like(lambda) + log_norm_const - (a + 1.0) * u - b / lambda + u;
        if (i == 0 || i == kNodes - 1) term -= std::log(2.0);  // trapezoid end weights
        log_den.push_back(term);
        log_num.push_back(term - u);
      }
      const double den = log_sum_exp(log_den);
      if (!std::isfinite(den))
        throw QuadratureFailure("oracle_e_inv_lambda: quadrature normalizer underflowed");
      return std::exp(log_sum_exp(log_num) - den);
    }
  }
  throw DomainError("oracle_e_inv_lambda: unknown mixing kind");
}

std::vector<GaussianBelief> oracle_filter(const StateSpaceModel& model, const NoiseSpec& noise,
                                          const Trajectory& traj, const GaussianBelief& init,
                                          const Matrix& r_nominal) {
  const MixingSpec mixing = MixingSpec::from_noise(noise);
  std::vector<GaussianBelief> out;
  out.reserve(traj.length());
  GaussianBelief belief = init;
  for (int k = 0; k < traj.length(); ++k) {
    const GaussianBelief pred = predict(belief, model);
    const Vector& z = traj.observations[k];
    const Vector innovation = vec_sub(z, mat_vec(model.H, pred.mean));
    const Matrix s0 = congruence_const(model.H, pred.cov, nullptr);
    const double e_inv = oracle_e_inv_lambda(innovation, s0, r_nominal, mixing);
    belief = kf_update(pred, z, mat_scale(r_nominal, 1.0 / e_inv), model).posterior;
    out.push_back(belief);
  }
  return out;
}

}  // namespace rkflab
