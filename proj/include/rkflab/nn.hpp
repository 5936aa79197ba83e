#ifndef RKFLAB_NN_HPP_
#define RKFLAB_NN_HPP_

#include <vector>

#include "rkflab/autodiff.hpp"
#include "rkflab/mat.hpp"
#include "rkflab/rng.hpp"

namespace rkflab {

/// Fully connected network parameters; weights[l] maps sizes[l] -> sizes[l+1].
struct FcnnParams {
  std::vector<int> sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static FcnnParams zeros(std::vector<int> sizes);
  /// Glorot-uniform weights (plus/minus sqrt(6/(fan_in+fan_out))), zero biases.
  static FcnnParams glorot(std::vector<int> sizes, RandomStream& rng);

  int param_count() const;
};

/// Scalar network output: leaky-ReLU hidden layers, linear last layer.
double fcnn_forward(const FcnnParams& params, const Vector& input);

struct TapedFcnn {
  std::vector<Mat<Var>> weights;
  std::vector<Vec<Var>> biases;
};

/// Registers every weight and bias as a tape leaf (weights row-major, then the
/// bias, layer by layer; the same order as the flat parameter vector).
TapedFcnn lift_fcnn(Tape& tape, const FcnnParams& params);

Var fcnn_forward(const TapedFcnn& params, const Vec<Var>& input);

// ---------------------------------------------------------------------------
// Adam with the halving learning-rate schedule.

struct LrSchedule {
  double base_rate = 2e-4;
  int halving_period = 400;

  /// base * 0.5^floor(t / period) for the 0-based iteration t.
  double rate(long t) const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;  // completed steps
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place; the effective rate comes from the
/// schedule at the state's current step counter.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               const LrSchedule& schedule);

}  // namespace rkflab

#endif  // RKFLAB_NN_HPP_
