#ifndef RKFLAB_RKFNET_HPP_
#define RKFLAB_RKFNET_HPP_

// The learned robust filter: shrink-compressed innovation features, an FCNN
// estimate of the inverse mixing weight, a learned scale-matrix factor, and
// the shared KF update. One scalar-generic core serves both the plain
// inference path and the taped training path.

#include <cstdint>
#include <vector>

#include "rkflab/autodiff.hpp"
#include "rkflab/checkpoint.hpp"
#include "rkflab/kf_core.hpp"
#include "rkflab/nn.hpp"
#include "rkflab/statespace.hpp"

namespace rkflab {

/// Trainable quantities plus the fixed gradient-boost constants.
struct RKFNetParams {
  FcnnParams fcnn;
  Matrix r_s;  // m x m scale factor
  double v_prime = 0.0;
  double sigma_prime = 0.0;
  double zeta1 = 300.0;
  double zeta2 = 300.0;
  double zeta3 = 300.0;

  /// Paper initialization: Glorot FCNN, R_s entries uniform on [0, 1/zeta1],
  /// loss parameters chosen so the starting Student-t has dof 3, scale
  /// sqrt(10).
  static RKFNetParams init(int m, RandomStream& rng,
                           std::vector<int> hidden = {32, 64, 32});

  int param_count() const;
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);
  std::vector<NamedArray> to_arrays() const;
  static RKFNetParams from_arrays(const std::vector<NamedArray>& arrays);
};

inline int feature_count(int m) { return m + m * (m + 1) / 2; }

/// Shrunken innovation plus the shrunken upper triangle (row-major) of the
/// projected prior covariance.
template <class S>
Vec<S> features(const Vec<S>& innovation, const Mat<S>& s0) {
  const int m = innovation.size();
  Vec<S> out(feature_count(m));
  int idx = 0;
  for (int i = 0; i < m; ++i) out[idx++] = shrink(innovation[i]);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) out[idx++] = shrink(s0(i, j));
  return out;
}

/// (zeta1 R_s)(zeta1 R_s)^T: symmetric PSD by construction.
template <class S>
Mat<S> r_hat(const Mat<S>& r_s, double zeta1) {
  const Mat<S> scaled = mat_scale(r_s, zeta1);
  return mat_mul(scaled, transpose(scaled));
}

Matrix r_hat(const RKFNetParams& params);

struct StepOutput {
  GaussianBelief posterior;
  Vector innovation;  // z - H F prev_mean
  double c_hat;       // estimated 1 / E[1/lambda], always positive
  Matrix r_tilde;     // c_hat * R_hat
};

/// One filtering step from the previous belief.
StepOutput rkfnet_step(const GaussianBelief& prev, const Vector& z, const RKFNetParams& params,
                       const StateSpaceModel& model);

/// Inference rollout: every step feeds on the model's own posterior.
std::vector<StepOutput> rkfnet_run(const std::vector<Vector>& observations,
                                   const GaussianBelief& init, const RKFNetParams& params,
                                   const StateSpaceModel& model);

// ---------------------------------------------------------------------------
// Taped rollout for training.

enum class StepSource : std::uint8_t { Own, Reference };

struct TapedRKFNet {
  TapedFcnn fcnn;
  Mat<Var> r_s;
  Var v_prime;
  Var sigma_prime;
  double zeta1 = 300.0;
  double zeta2 = 300.0;
  double zeta3 = 300.0;
  std::vector<std::uint32_t> leaf_ids;  // flat-order leaf node ids
};

/// Registers all trainables as leaves, in flat order.
TapedRKFNet lift_params(Tape& tape, const RKFNetParams& params);

struct TapedStep {
  Vec<Var> mean;        // own posterior mean (gradients flow)
  Mat<Var> cov;         // own posterior covariance
  Vec<Var> innovation;  // filter-internal innovation of this step
  Var c_hat;
};

/// Unrolled filter with scheduled-sampling input selection: at step k the
/// previous belief is either the model's own posterior (full backpropagation
/// through time) or the reference filter's belief lifted as a constant (no
/// gradient through the recurrent input). Step 1 always starts from `init`.
/// Throws MissingReference when a flag selects an absent reference.
std::vector<TapedStep> rkfnet_forward(Tape& tape, const std::vector<Vector>& observations,
                                      const GaussianBelief& init, const TapedRKFNet& params,
                                      const StateSpaceModel& model,
                                      const std::vector<GaussianBelief>* reference,
                                      const std::vector<StepSource>& selector);

}  // namespace rkflab

#endif  // RKFLAB_RKFNET_HPP_
