#include "rkflab/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "rkflab/errors.hpp"
#include "rkflab/metrics.hpp"

namespace rkflab {

void TrainingConfig::validate(int train_size) const {
  if (iterations < 0) throw DomainError("TrainingConfig: iterations must be >= 0");
  if (batch_size < 1) throw DomainError("TrainingConfig: batch_size must be >= 1");
  if (batch_size > train_size)
    throw DomainError("TrainingConfig: batch_size exceeds the training-set size");
  if (!(p_min >= 0.0 && p_min <= p_max && p_max <= 1.0))
    throw DomainError("TrainingConfig: need 0 <= p_min <= p_max <= 1");
  if (dp < 0.0) throw DomainError("TrainingConfig: dp must be >= 0");
  if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("TrainingConfig: penalties must be >= 0");
  if (runs < 1) throw DomainError("TrainingConfig: runs must be >= 1");
  if (cv_every < 1) throw DomainError("TrainingConfig: cv_every must be >= 1");
}

double uss_probability(long t, const TrainingConfig& cfg) {
  return std::max(cfg.p_min, cfg.p_max - cfg.dp * static_cast<double>(t));
}

std::vector<StepSource> draw_selector(int T, double p_t, RandomStream& rng) {
  std::vector<StepSource> flags(T);
  for (int k = 0; k < T; ++k)
    flags[k] = rng.u01() < p_t ? StepSource::Reference : StepSource::Own;
  return flags;
}

double TrainingHistory::final_cv_armse() const {
  if (!completed || cv.empty()) return std::numeric_limits<double>::infinity();
  return cv.back().armse;
}

namespace {

template <class S>
S component_loss(const S& x, const S& v, const S& sigma, LossKind kind) {
  using std::abs;
  switch (kind) {
    case LossKind::StudentT:
      return st_nll(x, v, sigma);
    case LossKind::L1:
      return abs(x);
    case LossKind::L2:
      return x * x;
  }
  throw DomainError("component_loss: unknown loss kind");
}

inline const Vector& step_mean(const StepOutput& s) { return s.posterior.mean; }
inline const Vec<Var>& step_mean(const TapedStep& s) { return s.mean; }

// Sum over the own one-step-ahead innovations z_{k+1} - H F mean_k, k = 1..T-1.
template <class S, class StepT>
S data_sum(const std::vector<StepT>& steps, const std::vector<Vector>& observations,
           const StateSpaceModel& model, const S& v, const S& sigma, LossKind kind) {
  const int T = static_cast<int>(steps.size());
  bool first = true;
  S acc{};
  for (int k = 0; k + 1 < T; ++k) {
    const auto pred = affine_map(model.F, step_mean(steps[k]), nullptr);
    const auto hx = affine_map(model.H, pred, nullptr);
    const auto dz = const_sub_vec(observations[k + 1], hx);
    for (int i = 0; i < dz.size(); ++i) {
      S term = component_loss(dz[i], v, sigma, kind);
      acc = first ? term : acc + term;
      first = false;
    }
  }
  return acc;
}

}  // namespace

std::vector<StepOutput> rkfnet_run_selected(const std::vector<Vector>& observations,
                                            const GaussianBelief& init,
                                            const RKFNetParams& params,
                                            const StateSpaceModel& model,
                                            const std::vector<GaussianBelief>* reference,
                                            const std::vector<StepSource>& selector) {
  const int T = static_cast<int>(observations.size());
  if (static_cast<int>(selector.size()) != T)
    throw DimensionMismatch("rkfnet_run_selected: selector length must equal T");
  std::vector<StepOutput> out;
  out.reserve(T);
  GaussianBelief belief = init;
  for (int k = 0; k < T; ++k) {
    if (k > 0 && selector[k] == StepSource::Reference) {
      if (reference == nullptr || static_cast<int>(reference->size()) < k)
        throw MissingReference("rkfnet_run_selected: absent reference belief");
      belief = (*reference)[k - 1];
    }
    out.push_back(rkfnet_step(belief, observations[k], params, model));
    belief = out.back().posterior;
  }
  return out;
}

double loss_value(const RKFNetParams& params, const StateSpaceModel& model,
                  const GaussianBelief& init, const std::vector<const Trajectory*>& batch,
                  const std::vector<const std::vector<GaussianBelief>*>& references,
                  const std::vector<std::vector<StepSource>>& selectors,
                  const TrainingConfig& cfg) {
  const int n_traj = static_cast<int>(batch.size());
  const int T = batch.front()->length();
  const int m = model.m;
  const double v = exp_clamped(params.zeta2 * params.v_prime);
  const double sigma = exp_clamped(params.zeta3 * params.sigma_prime);
  const double norm = 1.0 / (static_cast<double>(n_traj) * (T - 1) * m);

  double data = 0.0;
  for (int j = 0; j < n_traj; ++j) {
    const std::vector<StepOutput> steps = rkfnet_run_selected(
        batch[j]->observations, init, params, model, references.empty() ? nullptr : references[j],
        selectors[j]);
    data += data_sum(steps, batch[j]->observations, model, v, sigma, cfg.loss);
  }
  data *= norm;

  const double det = det_small(r_hat(params));
  double l2 = 0.0;
  for (double th : params.flatten()) l2 += th * th;
  return data + cfg.gamma1 * (det - 1.0) * (det - 1.0) + cfg.gamma2 * l2;
}

LossGradient loss_gradient(const RKFNetParams& params, const StateSpaceModel& model,
                           const GaussianBelief& init,
                           const std::vector<const Trajectory*>& batch,
                           const std::vector<const std::vector<GaussianBelief>*>& references,
                           const std::vector<std::vector<StepSource>>& selectors,
                           const TrainingConfig& cfg, Tape& tape) {
  const int n_traj = static_cast<int>(batch.size());
  const int T = batch.front()->length();
  const int m = model.m;
  const double norm = 1.0 / (static_cast<double>(n_traj) * (T - 1) * m);
  const std::size_t n_params = static_cast<std::size_t>(params.param_count());

  LossGradient out;
  out.grad.assign(n_params, 0.0);
  std::vector<double> adjoint;

  for (int j = 0; j < n_traj; ++j) {
    tape.reset();
    const TapedRKFNet lifted = lift_params(tape, params);
    const Var v = exp_clamped(lifted.zeta2 * lifted.v_prime);
    const Var sigma = exp_clamped(lifted.zeta3 * lifted.sigma_prime);
    const std::vector<TapedStep> steps =
        rkfnet_forward(tape, batch[j]->observations, init, lifted, model,
                       references.empty() ? nullptr : references[j], selectors[j]);
    const Var traj_sum = data_sum(steps, batch[j]->observations, model, v, sigma, cfg.loss);
    out.data_term += norm * traj_sum.value();
    tape.backward_into(traj_sum, adjoint);
    for (std::size_t i = 0; i < n_params; ++i) out.grad[i] += norm * adjoint[lifted.leaf_ids[i]];
  }

  // Penalties live on their own small graph; they depend only on parameters.
  tape.reset();
  const TapedRKFNet lifted = lift_params(tape, params);
  const Var det = det_small(r_hat(lifted.r_s, lifted.zeta1));
  const Var det_dev = det - 1.0;
  Var l2{};
  bool first = true;
  for (std::uint32_t id : lifted.leaf_ids) {
    const Var theta{&tape, id};
    const Var sq = theta * theta;
    l2 = first ? sq : l2 + sq;
    first = false;
  }
  const Var penalty = cfg.gamma1 * (det_dev * det_dev) + cfg.gamma2 * l2;
  out.penalty_term = penalty.value();
  tape.backward_into(penalty, adjoint);
  for (std::size_t i = 0; i < n_params; ++i) out.grad[i] += adjoint[lifted.leaf_ids[i]];

  out.value = out.data_term + out.penalty_term;
  if (!std::isfinite(out.value)) throw NonFiniteLoss("loss_gradient: non-finite training loss");
  for (double g : out.grad)
    if (!std::isfinite(g)) throw NonFiniteLoss("loss_gradient: non-finite gradient entry");
  return out;
}

double evaluate_armse(const RKFNetParams& params, const StateSpaceModel& model,
                      const GaussianBelief& init, const std::vector<Trajectory>& set) {
  std::vector<std::vector<GaussianBelief>> estimates;
  estimates.reserve(set.size());
  for (const Trajectory& traj : set) {
    std::vector<GaussianBelief> beliefs;
    beliefs.reserve(traj.length());
    for (const StepOutput& s : rkfnet_run(traj.observations, init, params, model))
      beliefs.push_back(s.posterior);
    estimates.push_back(std::move(beliefs));
  }
  return armse(estimates, set);
}

namespace {

void log_line(std::ostream* log, const char* fmt, ...) {
  if (log == nullptr) return;
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  (*log) << buf;
}

}  // namespace

TrainResult train_single(const StateSpaceModel& model, const std::vector<Trajectory>& train_set,
                         const std::vector<std::vector<GaussianBelief>>& references,
                         const std::vector<Trajectory>& cv_set, const GaussianBelief& init,
                         const TrainingConfig& cfg, std::uint64_t run_seed, std::ostream* log) {
  cfg.validate(static_cast<int>(train_set.size()));
  if (references.size() != train_set.size())
    throw DimensionMismatch("train_single: need one reference sequence per training trajectory");

  RandomStream rng_init = RandomStream::derived(run_seed, {1});
  RandomStream rng_batch = RandomStream::derived(run_seed, {2});
  RandomStream rng_selector = RandomStream::derived(run_seed, {3});

  TrainResult result;
  result.params = RKFNetParams::init(model.m, rng_init);
  std::vector<double> flat = result.params.flatten();
  AdamState adam(flat.size());
  const LrSchedule schedule{cfg.base_rate, cfg.rate_halving_period};
  Tape tape;
  tape.reserve(1u << 17, 1u << 21);

  const auto cv_eval = [&](long iteration) {
    const double a = evaluate_armse(result.params, model, init, cv_set);
    result.history.cv.push_back({iteration, a});
    log_line(log, "cv\t%ld\t%.10g\n", iteration, a);
  };

  // Epoch sampling without replacement; reshuffle when a full batch no longer
  // fits.
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t pos = order.size();  // force initial shuffle
  const auto next_batch = [&]() {
    if (pos + cfg.batch_size > order.size()) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng_batch.next_u64() % i)]);
      pos = 0;
    }
    std::vector<int> batch(order.begin() + pos, order.begin() + pos + cfg.batch_size);
    pos += cfg.batch_size;
    return batch;
  };

  try {
    cv_eval(0);
    for (long t = 0; t < cfg.iterations; ++t) {
      const double p_t = uss_probability(t, cfg);
      const std::vector<int> batch_idx = next_batch();
      std::vector<const Trajectory*> batch;
      std::vector<const std::vector<GaussianBelief>*> refs;
      std::vector<std::vector<StepSource>> selectors;
      batch.reserve(batch_idx.size());
      for (int idx : batch_idx) {
        batch.push_back(&train_set[idx]);
        refs.push_back(&references[idx]);
        selectors.push_back(draw_selector(train_set[idx].length(), p_t, rng_selector));
      }
      const LossGradient lg =
          loss_gradient(result.params, model, init, batch, refs, selectors, cfg, tape);
      adam_step(adam, flat, lg.grad, schedule);
      result.params.unflatten(flat);
      result.history.losses.push_back(lg.value);
      log_line(log, "%ld\t%.6f\t%.10g\t%.10g\n", t, p_t, lg.value, schedule.rate(t));
      if ((t + 1) % cfg.cv_every == 0 || t + 1 == cfg.iterations) cv_eval(t + 1);
    }
    result.history.completed = true;
  } catch (const NonFiniteLoss& e) {
    result.history.abort_reason = e.what();
    log_line(log, "abort\t%s\n", e.what());
  } catch (const SingularInnovation& e) {
    result.history.abort_reason = e.what();
    log_line(log, "abort\t%s\n", e.what());
  }
  return result;
}

MultiRunResult train_restarts(const StateSpaceModel& model,
                              const std::vector<Trajectory>& train_set,
                              const std::vector<std::vector<GaussianBelief>>& references,
                              const std::vector<Trajectory>& cv_set, const GaussianBelief& init,
                              const TrainingConfig& cfg, std::vector<std::ostream*> logs) {
  MultiRunResult out;
  out.runs.reserve(cfg.runs);
  for (int r = 0; r < cfg.runs; ++r) {
    std::ostream* log = r < static_cast<int>(logs.size()) ? logs[r] : nullptr;
    const std::uint64_t run_seed = derive_seed(cfg.seed, {17, static_cast<std::uint64_t>(r)});
    out.runs.push_back(
        train_single(model, train_set, references, cv_set, init, cfg, run_seed, log));
  }
  out.selected = select_best(out.runs);
  return out;
}

int select_best(const std::vector<TrainResult>& runs) {
  if (runs.empty()) throw AllRunsFailed("select_best: no runs supplied");
  int best = -1;
  double best_armse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const double a = runs[r].history.final_cv_armse();
    if (a < best_armse) {
      best_armse = a;
      best = static_cast<int>(r);
    }
  }
  if (best < 0) throw AllRunsFailed("select_best: every training run diverged");
  return best;
}

}  // namespace rkflab
