#include "rkflab/nn.hpp"

#include <cmath>

#include "rkflab/errors.hpp"
#include "rkflab/scalar_ops.hpp"

namespace rkflab {

FcnnParams FcnnParams::zeros(std::vector<int> sizes) {
  if (sizes.size() < 2) throw DimensionMismatch("FcnnParams: need at least input and output size");
  FcnnParams p;
  p.sizes = std::move(sizes);
  for (std::size_t l = 0; l + 1 < p.sizes.size(); ++l) {
    p.weights.emplace_back(p.sizes[l + 1], p.sizes[l], 0.0);
    p.biases.emplace_back(p.sizes[l + 1], 0.0);
  }
  return p;
}

FcnnParams FcnnParams::glorot(std::vector<int> sizes, RandomStream& rng) {
  FcnnParams p = zeros(std::move(sizes));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double bound = std::sqrt(6.0 / (p.sizes[l] + p.sizes[l + 1]));
    Matrix& w = p.weights[l];
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
  }
  return p;
}

int FcnnParams::param_count() const {
  int count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    count += weights[l].rows() * weights[l].cols() + biases[l].size();
  return count;
}

double fcnn_forward(const FcnnParams& params, const Vector& input) {
  if (input.size() != params.sizes.front())
    throw DimensionMismatch("fcnn_forward: input size does not match the first layer");
  if (params.sizes.back() != 1)
    throw DimensionMismatch("fcnn_forward: scalar output expects a single output unit");
  Vector x = input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Matrix& w = params.weights[l];
    const Vector& b = params.biases[l];
    Vector y(w.rows());
    for (int i = 0; i < w.rows(); ++i) {
      double acc = b[i];
      for (int j = 0; j < w.cols(); ++j) acc += w(i, j) * x[j];
      y[i] = acc;
    }
    if (l + 1 < params.weights.size())
      for (int i = 0; i < y.size(); ++i) y[i] = leaky_relu(y[i]);
    x = y;
  }
  return x[0];
}

TapedFcnn lift_fcnn(Tape& tape, const FcnnParams& params) {
  TapedFcnn out;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    out.weights.push_back(lift(tape, params.weights[l]));
    out.biases.push_back(lift(tape, params.biases[l]));
  }
  return out;
}

Var fcnn_forward(const TapedFcnn& params, const Vec<Var>& input) {
  Vec<Var> x = input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Mat<Var>& w = params.weights[l];
    const Vec<Var>& b = params.biases[l];
    if (w.cols() != x.size())
      throw DimensionMismatch("fcnn_forward: input size does not match the layer");
    Vec<Var> y(w.rows());
    for (int i = 0; i < w.rows(); ++i)
      y[i] = affine_params(b[i], &w(i, 0), x.data(), w.cols());
    if (l + 1 < params.weights.size())
      for (int i = 0; i < y.size(); ++i) y[i] = leaky_relu(y[i]);
    x = y;
  }
  if (x.size() != 1) throw DimensionMismatch("fcnn_forward: scalar output expects one unit");
  return x[0];
}

double LrSchedule::rate(long t) const {
  return base_rate * std::pow(0.5, static_cast<double>(t / halving_period));
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               const LrSchedule& schedule) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw DimensionMismatch("adam_step: parameter, gradient and state sizes differ");
  const double lr = schedule.rate(state.t);
  const long tb = state.t + 1;  // bias-correction step count
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(tb));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(tb));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  ++state.t;
}

}  // namespace rkflab
