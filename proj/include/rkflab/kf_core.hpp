#ifndef RKFLAB_KF_CORE_HPP_
#define RKFLAB_KF_CORE_HPP_

// Measurement and time updates written once against the scalar-generic matrix
// layer. The model-based filters instantiate these with double; the learned
// filter instantiates them with the tape variable, which makes the whole
// update differentiable without a second implementation of the equations.

#include "rkflab/mat.hpp"

namespace rkflab {

template <class S>
struct KfStep {
  Vec<S> mean;            // posterior mean
  Mat<S> cov;             // posterior covariance, symmetric
  Vec<S> innovation;      // z - H * predicted mean
  Mat<S> innovation_cov;  // H P H^T + R_eff
  Mat<S> gain;            // n x m Kalman gain
};

template <class S>
void predict_core(const Matrix& f, const Matrix& q, const Vec<S>& mean, const Mat<S>& cov,
                  Vec<S>& mean_out, Mat<S>& cov_out) {
  mean_out = affine_map(f, mean, nullptr);
  cov_out = congruence_const(f, cov, &q);
}

/// Measurement update from a precomputed innovation and projected prior
/// covariance s0 = H P H^T (the same nodes then serve the update and any
/// consumer of the innovation).
template <class S>
KfStep<S> kf_core_with(const Vec<S>& mean_pred, const Mat<S>& cov_pred, const Vec<S>& innovation,
                       const Mat<S>& s0, const Mat<S>& r_eff, const Matrix& h) {
  KfStep<S> out;
  out.innovation = innovation;
  out.innovation_cov = mat_add(s0, r_eff);
  const Mat<S> lower = cholesky_with_jitter(out.innovation_cov);
  const Mat<S> hp = mul_const_left(h, cov_pred);
  out.gain = transpose(chol_solve_mat(lower, hp));
  out.mean = vec_add_s(mean_pred, mat_vec(out.gain, out.innovation));
  const Mat<S> kh = mul_const_right(out.gain, h);
  out.cov = symmetrize(mat_mul(identity_minus(kh), cov_pred));
  return out;
}

template <class S>
KfStep<S> kf_core(const Vec<S>& mean_pred, const Mat<S>& cov_pred, const Vector& z,
                  const Mat<S>& r_eff, const Matrix& h) {
  const Vec<S> hx = affine_map(h, mean_pred, nullptr);
  const Vec<S> innovation = const_sub_vec(z, hx);
  const Mat<S> s0 = congruence_const(h, cov_pred, nullptr);
  return kf_core_with(mean_pred, cov_pred, innovation, s0, r_eff, h);
}

}  // namespace rkflab

#endif  // RKFLAB_KF_CORE_HPP_
