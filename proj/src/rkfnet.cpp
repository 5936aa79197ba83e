#include "rkflab/rkfnet.hpp"

#include <cmath>
#include <utility>

#include "rkflab/errors.hpp"
#include "rkflab/scalar_ops.hpp"

namespace rkflab {

RKFNetParams RKFNetParams::init(int m, RandomStream& rng, std::vector<int> hidden) {
  RKFNetParams p;
  std::vector<int> sizes;
  sizes.push_back(feature_count(m));
  for (int hs : hidden) sizes.push_back(hs);
  sizes.push_back(1);
  p.fcnn = FcnnParams::glorot(std::move(sizes), rng);
  p.r_s = Matrix(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) p.r_s(i, j) = rng.uniform(0.0, 1.0 / p.zeta1);
  p.v_prime = std::log(3.0) / p.zeta2;
  p.sigma_prime = 0.5 * std::log(10.0) / p.zeta3;
  return p;
}

int RKFNetParams::param_count() const {
  return fcnn.param_count() + r_s.rows() * r_s.cols() + 2;
}

std::vector<double> RKFNetParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (std::size_t l = 0; l < fcnn.weights.size(); ++l) {
    const Matrix& w = fcnn.weights[l];
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) flat.push_back(w(i, j));
    const Vector& b = fcnn.biases[l];
    for (int i = 0; i < b.size(); ++i) flat.push_back(b[i]);
  }
  for (int i = 0; i < r_s.rows(); ++i)
    for (int j = 0; j < r_s.cols(); ++j) flat.push_back(r_s(i, j));
  flat.push_back(v_prime);
  flat.push_back(sigma_prime);
  return flat;
}

void RKFNetParams::unflatten(const std::vector<double>& flat) {
  if (static_cast<int>(flat.size()) != param_count())
    throw DimensionMismatch("RKFNetParams::unflatten: size mismatch");
  std::size_t idx = 0;
  for (std::size_t l = 0; l < fcnn.weights.size(); ++l) {
    Matrix& w = fcnn.weights[l];
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) w(i, j) = flat[idx++];
    Vector& b = fcnn.biases[l];
    for (int i = 0; i < b.size(); ++i) b[i] = flat[idx++];
  }
  for (int i = 0; i < r_s.rows(); ++i)
    for (int j = 0; j < r_s.cols(); ++j) r_s(i, j) = flat[idx++];
  v_prime = flat[idx++];
  sigma_prime = flat[idx++];
}

std::vector<NamedArray> RKFNetParams::to_arrays() const {
  std::vector<NamedArray> arrays;
  for (std::size_t l = 0; l < fcnn.weights.size(); ++l) {
    const Matrix& w = fcnn.weights[l];
    NamedArray wa{"fcnn.w" + std::to_string(l),
                  {static_cast<std::uint32_t>(w.rows()), static_cast<std::uint32_t>(w.cols())},
                  {}};
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) wa.data.push_back(w(i, j));
    arrays.push_back(std::move(wa));
    const Vector& b = fcnn.biases[l];
    NamedArray ba{"fcnn.b" + std::to_string(l), {static_cast<std::uint32_t>(b.size())}, {}};
    for (int i = 0; i < b.size(); ++i) ba.data.push_back(b[i]);
    arrays.push_back(std::move(ba));
  }
  NamedArray rs{"R_s",
                {static_cast<std::uint32_t>(r_s.rows()), static_cast<std::uint32_t>(r_s.cols())},
                {}};
  for (int i = 0; i < r_s.rows(); ++i)
    for (int j = 0; j < r_s.cols(); ++j) rs.data.push_back(r_s(i, j));
  arrays.push_back(std::move(rs));
  arrays.push_back({"v_prime", {1}, {v_prime}});
  arrays.push_back({"sigma_prime", {1}, {sigma_prime}});
  arrays.push_back({"zeta1", {1}, {zeta1}});
  arrays.push_back({"zeta2", {1}, {zeta2}});
  arrays.push_back({"zeta3", {1}, {zeta3}});
  return arrays;
}

RKFNetParams RKFNetParams::from_arrays(const std::vector<NamedArray>& arrays) {
  auto find = [&](const std::string& name) -> const NamedArray& {
    for (const NamedArray& a : arrays)
      if (a.name == name) return a;
    throw ConfigError("RKFNetParams::from_arrays: missing array " + name);
  };
  RKFNetParams p;
  // Layer count: fcnn.wL arrays present in the checkpoint.
  int layers = 0;
  while (true) {
    bool found = false;
    for (const NamedArray& a : arrays)
      if (a.name == "fcnn.w" + std::to_string(layers)) found = true;
    if (!found) break;
    ++layers;
  }
  if (layers == 0) throw ConfigError("RKFNetParams::from_arrays: no FCNN layers found");
  p.fcnn.sizes.clear();
  for (int l = 0; l < layers; ++l) {
    const NamedArray& wa = find("fcnn.w" + std::to_string(l));
    const NamedArray& ba = find("fcnn.b" + std::to_string(l));
    const int rows = static_cast<int>(wa.shape.at(0));
    const int cols = static_cast<int>(wa.shape.at(1));
    if (l == 0) p.fcnn.sizes.push_back(cols);
    p.fcnn.sizes.push_back(rows);
    Matrix w(rows, cols);
    std::size_t idx = 0;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = wa.data[idx++];
    p.fcnn.weights.push_back(std::move(w));
    Vector b(rows);
    for (int i = 0; i < rows; ++i) b[i] = ba.data.at(i);
    p.fcnn.biases.push_back(std::move(b));
  }
  const NamedArray& rs = find("R_s");
  const int m = static_cast<int>(rs.shape.at(0));
  p.r_s = Matrix(m, m);
  std::size_t idx = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) p.r_s(i, j) = rs.data[idx++];
  p.v_prime = find("v_prime").data.at(0);
  p.sigma_prime = find("sigma_prime").data.at(0);
  p.zeta1 = find("zeta1").data.at(0);
  p.zeta2 = find("zeta2").data.at(0);
  p.zeta3 = find("zeta3").data.at(0);
  return p;
}

Matrix r_hat(const RKFNetParams& params) { return r_hat(params.r_s, params.zeta1); }

StepOutput rkfnet_step(const GaussianBelief& prev, const Vector& z, const RKFNetParams& params,
                       const StateSpaceModel& model) {
  Vector mean_pred;
  Matrix cov_pred;
  predict_core(model.F, model.Q, prev.mean, prev.cov, mean_pred, cov_pred);
  const Vector hx = affine_map(model.H, mean_pred, nullptr);
  const Vector innovation = const_sub_vec(z, hx);
  const Matrix s0 = congruence_const(model.H, cov_pred, nullptr);
  const Vector feat = features(innovation, s0);
  const double c = exp_clamped(fcnn_forward(params.fcnn, feat));
  const Matrix r_tilde = mat_scale_s(r_hat(params), c);
  KfStep<double> step = kf_core_with(mean_pred, cov_pred, innovation, s0, r_tilde, model.H);
  return StepOutput{GaussianBelief{std::move(step.mean), std::move(step.cov)},
                    std::move(step.innovation), c, r_tilde};
}

std::vector<StepOutput> rkfnet_run(const std::vector<Vector>& observations,
                                   const GaussianBelief& init, const RKFNetParams& params,
                                   const StateSpaceModel& model) {
  std::vector<StepOutput> out;
  out.reserve(observations.size());
  GaussianBelief belief = init;
  for (const Vector& z : observations) {
    out.push_back(rkfnet_step(belief, z, params, model));
    belief = out.back().posterior;
  }
  return out;
}

TapedRKFNet lift_params(Tape& tape, const RKFNetParams& params) {
  TapedRKFNet out;
  const std::uint32_t first = static_cast<std::uint32_t>(tape.size());
  out.fcnn = lift_fcnn(tape, params.fcnn);
  out.r_s = lift(tape, params.r_s);
  out.v_prime = tape.leaf(params.v_prime);
  out.sigma_prime = tape.leaf(params.sigma_prime);
  out.zeta1 = params.zeta1;
  out.zeta2 = params.zeta2;
  out.zeta3 = params.zeta3;
  // lift/lift_fcnn create one leaf per parameter, in flat order
  const std::uint32_t last = static_cast<std::uint32_t>(tape.size());
  out.leaf_ids.reserve(last - first);
  for (std::uint32_t id = first; id < last; ++id) out.leaf_ids.push_back(id);
  return out;
}

std::vector<TapedStep> rkfnet_forward(Tape& tape, const std::vector<Vector>& observations,
                                      const GaussianBelief& init, const TapedRKFNet& params,
                                      const StateSpaceModel& model,
                                      const std::vector<GaussianBelief>* reference,
                                      const std::vector<StepSource>& selector) {
  const int T = static_cast<int>(observations.size());
  if (static_cast<int>(selector.size()) != T)
    throw DimensionMismatch("rkfnet_forward: selector length must equal T");
  const Mat<Var> rhat = r_hat(params.r_s, params.zeta1);

  std::vector<TapedStep> out;
  out.reserve(T);
  Vec<Var> mean = lift(tape, init.mean);
  Mat<Var> cov = lift(tape, init.cov);
  for (int k = 0; k < T; ++k) {
    if (k > 0 && selector[k] == StepSource::Reference) {
      if (reference == nullptr || static_cast<int>(reference->size()) < k)
        throw MissingReference("rkfnet_forward: selector requests an absent reference belief");
      // Constant input: the recurrent gradient path is cut here.
      mean = lift(tape, (*reference)[k - 1].mean);
      cov = lift(tape, (*reference)[k - 1].cov);
    }
    Vec<Var> mean_pred;
    Mat<Var> cov_pred;
    predict_core(model.F, model.Q, mean, cov, mean_pred, cov_pred);
    const Vec<Var> hx = affine_map(model.H, mean_pred, nullptr);
    const Vec<Var> innovation = const_sub_vec(observations[k], hx);
    const Mat<Var> s0 = congruence_const(model.H, cov_pred, nullptr);
    const Vec<Var> feat = features(innovation, s0);
    const Var c = exp_clamped(fcnn_forward(params.fcnn, feat));
    const Mat<Var> r_tilde = mat_scale_s(rhat, c);
    KfStep<Var> step = kf_core_with(mean_pred, cov_pred, innovation, s0, r_tilde, model.H);
    mean = step.mean;
    cov = step.cov;
    out.push_back(TapedStep{std::move(step.mean), std::move(step.cov), innovation, c});
  }
  return out;
}

}  // namespace rkflab
