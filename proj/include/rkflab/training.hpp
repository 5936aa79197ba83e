#ifndef RKFLAB_TRAINING_HPP_
#define RKFLAB_TRAINING_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rkflab/rkfnet.hpp"
#include "rkflab/scalar_ops.hpp"
#include "rkflab/statespace.hpp"

namespace rkflab {

enum class LossKind : std::uint8_t { StudentT, L1, L2 };

struct TrainingConfig {
  int iterations = 2000;
  int batch_size = 200;
  double base_rate = 2e-4;
  int rate_halving_period = 400;
  double p_max = 1.0;
  double p_min = 0.0;
  double dp = 1.0 / 600.0;
  double gamma1 = 0.1;    // det(R_hat) identifiability penalty
  double gamma2 = 1e-4;   // L2 penalty on all trainables
  int runs = 5;
  std::uint64_t seed = 0;
  int cv_every = 100;
  LossKind loss = LossKind::StudentT;

  void validate(int train_size) const;
};

/// Probability of feeding the reference belief at iteration t:
/// max(p_min, p_max - dp * t).
double uss_probability(long t, const TrainingConfig& cfg);

/// Independent Bernoulli(p_t) source flag per time step.
std::vector<StepSource> draw_selector(int T, double p_t, RandomStream& rng);

struct CvRecord {
  long iteration;
  double armse;
};

struct TrainingHistory {
  std::vector<double> losses;
  std::vector<CvRecord> cv;
  bool completed = false;
  std::string abort_reason;

  /// Last recorded CV ARMSE; +inf for aborted or never-evaluated runs.
  double final_cv_armse() const;
};

struct TrainResult {
  RKFNetParams params;
  TrainingHistory history;
};

// ---------------------------------------------------------------------------
// Loss. The data term averages the per-component loss of the one-step-ahead
// innovations z_{k+1} - H F x_hat_{k|k} of the model's own posteriors over
// trajectories, the T-1 usable time indices and the m components; scheduled
// sampling replaces only the recurrent input, never the loss target, so a
// reference-fed step still trains through its own Blocks II/III. Penalties:
// gamma1 (det(R_hat) - 1)^2 + gamma2 ||theta||^2.

/// Plain-valued training loss (the finite-difference oracle target).
double loss_value(const RKFNetParams& params, const StateSpaceModel& model,
                  const GaussianBelief& init, const std::vector<const Trajectory*>& batch,
                  const std::vector<const std::vector<GaussianBelief>*>& references,
                  const std::vector<std::vector<StepSource>>& selectors,
                  const TrainingConfig& cfg);

struct LossGradient {
  double value = 0.0;
  double data_term = 0.0;
  double penalty_term = 0.0;
  std::vector<double> grad;  // flat order
};

/// Taped loss and gradient; trajectories run on their own (reused) tape and
/// the gradients are reduced in batch order. Throws NonFiniteLoss when the
/// total is not finite.
LossGradient loss_gradient(const RKFNetParams& params, const StateSpaceModel& model,
                           const GaussianBelief& init,
                           const std::vector<const Trajectory*>& batch,
                           const std::vector<const std::vector<GaussianBelief>*>& references,
                           const std::vector<std::vector<StepSource>>& selectors,
                           const TrainingConfig& cfg, Tape& tape);

/// Deterministic scheduled-sampling rollout in plain doubles (used by the
/// loss oracle; inference uses rkfnet_run).
std::vector<StepOutput> rkfnet_run_selected(const std::vector<Vector>& observations,
                                            const GaussianBelief& init,
                                            const RKFNetParams& params,
                                            const StateSpaceModel& model,
                                            const std::vector<GaussianBelief>* reference,
                                            const std::vector<StepSource>& selector);

/// Position ARMSE of a pure own-rollout over a set of trajectories.
double evaluate_armse(const RKFNetParams& params, const StateSpaceModel& model,
                      const GaussianBelief& init, const std::vector<Trajectory>& set);

/// One training run. A non-finite loss (or a singular innovation) aborts the
/// run; the history is returned with completed = false and the reason set.
/// Log lines: per iteration "iter \t p_t \t loss \t lr", cross-validation
/// records "cv \t iter \t armse".
TrainResult train_single(const StateSpaceModel& model, const std::vector<Trajectory>& train_set,
                         const std::vector<std::vector<GaussianBelief>>& references,
                         const std::vector<Trajectory>& cv_set, const GaussianBelief& init,
                         const TrainingConfig& cfg, std::uint64_t run_seed, std::ostream* log);

struct MultiRunResult {
  std::vector<TrainResult> runs;
  int selected = -1;
};

/// cfg.runs independent restarts (distinct derived seeds, shared data) with
/// the best final cross-validation ARMSE selected.
MultiRunResult train_restarts(const StateSpaceModel& model,
                              const std::vector<Trajectory>& train_set,
                              const std::vector<std::vector<GaussianBelief>>& references,
                              const std::vector<Trajectory>& cv_set, const GaussianBelief& init,
                              const TrainingConfig& cfg, std::vector<std::ostream*> logs = {});

/// Index of the completed run with minimal final CV ARMSE (ties: lowest
/// index). Throws AllRunsFailed if no run completed.
int select_best(const std::vector<TrainResult>& runs);

}  // namespace rkflab

#endif  // RKFLAB_TRAINING_HPP_
