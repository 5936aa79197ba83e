// Command-line driver: dataset simulation, training, filtering and
// comparison reports, all steered by a config file with CLI overrides.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rkflab/config.hpp"
#include "rkflab/dataset.hpp"
#include "rkflab/errors.hpp"
#include "rkflab/filters.hpp"
#include "rkflab/metrics.hpp"
#include "rkflab/rkfnet.hpp"
#include "rkflab/training.hpp"

namespace fs = std::filesystem;
using namespace rkflab;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> loss;
  std::optional<double> p_min;
  std::optional<std::string> reference;
};

StateSpaceModel model_from(const Config& cfg) { return cv_model(cfg.get_double("model.dt", 1.0)); }

GaussianBelief init_from(const Config& cfg, int n) {
  GaussianBelief init;
  std::vector<double> mean{0.0, 0.0, 10.0, 10.0};
  std::vector<double> cov_diag{25.0, 25.0, 2.0, 2.0};
  if (cfg.has("init.mean")) mean = cfg.get_double_list("init.mean");
  if (cfg.has("init.cov_diag")) cov_diag = cfg.get_double_list("init.cov_diag");
  if (static_cast<int>(mean.size()) != n || static_cast<int>(cov_diag.size()) != n)
    throw ConfigError("init: mean/cov_diag must have the state dimension");
  init.mean = Vector(n);
  init.cov = Matrix(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    init.mean[i] = mean[i];
    init.cov(i, i) = cov_diag[i];
  }
  return init;
}

NoiseSpec noise_from(const Config& cfg, int m) {
  Matrix scale(m, m, 0.0);
  if (cfg.has("noise.scale_diag")) {
    const std::vector<double> diag = cfg.get_double_list("noise.scale_diag");
    if (static_cast<int>(diag.size()) != m)
      throw ConfigError("noise.scale_diag: wrong dimension");
    for (int i = 0; i < m; ++i) scale(i, i) = diag[i];
  } else {
    const double s = cfg.get_double("noise.scale", 10.0);
    for (int i = 0; i < m; ++i) scale(i, i) = s;
  }
  const std::string family = cfg.get_string("noise.family", "gaussian");
  if (family == "gaussian") return NoiseSpec::gaussian(scale);
  if (family == "gm")
    return NoiseSpec::gaussian_mixture(scale, cfg.get_double("noise.U"),
                                       cfg.get_double("noise.p_out", 0.1));
  if (family == "student_t") return NoiseSpec::student_t(scale, cfg.get_double("noise.v"));
  if (family == "sgas") return NoiseSpec::sg_alpha_s(scale, cfg.get_double("noise.alpha"));
  throw ConfigError("noise.family: expected gaussian|gm|student_t|sgas, got " + family);
}

std::string dataset_dir(const Config& cfg, const CommonOpts& opts) {
  if (opts.out) return *opts.out;
  return cfg.get_string("dataset.dir");
}

Dataset load_split(const Config& cfg, const std::string& split) {
  return load_dataset(cfg.get_string("dataset.dir") + "/" + split + ".ds");
}

LossKind loss_kind(const std::string& name) {
  if (name == "st") return LossKind::StudentT;
  if (name == "l1") return LossKind::L1;
  if (name == "l2") return LossKind::L2;
  throw ConfigError("loss: expected st|l1|l2, got " + name);
}

TrainingConfig training_from(const Config& cfg, const CommonOpts& opts) {
  TrainingConfig tc;
  tc.iterations = static_cast<int>(cfg.get_int("training.iterations", tc.iterations));
  tc.batch_size = static_cast<int>(cfg.get_int("training.batch_size", tc.batch_size));
  tc.base_rate = cfg.get_double("training.base_rate", tc.base_rate);
  tc.rate_halving_period =
      static_cast<int>(cfg.get_int("training.rate_halving_period", tc.rate_halving_period));
  tc.p_max = cfg.get_double("training.p_max", tc.p_max);
  tc.p_min = cfg.get_double("training.p_min", tc.p_min);
  if (cfg.has("training.dp_denominator"))
    tc.dp = 1.0 / cfg.get_double("training.dp_denominator");
  else
    tc.dp = cfg.get_double("training.dp", tc.dp);
  tc.gamma1 = cfg.get_double("training.gamma1", tc.gamma1);
  tc.gamma2 = cfg.get_double("training.gamma2", tc.gamma2);
  tc.runs = static_cast<int>(cfg.get_int("training.runs", tc.runs));
  tc.cv_every = static_cast<int>(cfg.get_int("training.cv_every", tc.cv_every));
  tc.loss = loss_kind(cfg.get_string("training.loss", "st"));
  tc.seed = cfg.get_int("training.seed", 1);
  if (opts.seed) tc.seed = *opts.seed;
  if (opts.loss) tc.loss = loss_kind(*opts.loss);
  if (opts.p_min) tc.p_min = *opts.p_min;
  return tc;
}

std::vector<std::vector<GaussianBelief>> reference_outputs(const std::string& kind,
                                                           const Dataset& data,
                                                           const Config& cfg) {
  const Matrix r_nominal = data.noise.scale;
  const double dof = cfg.get_double("training.reference_dof", 3.0);
  const FixedPointControl ctrl;
  std::vector<std::vector<GaussianBelief>> refs;
  refs.reserve(data.trajectories.size());
  for (const Trajectory& traj : data.trajectories) {
    if (kind == "vb")
      refs.push_back(vb_rkf_filter(data.model, r_nominal, dof, ctrl, traj, data.init));
    else if (kind == "kf")
      refs.push_back(kf_filter(data.model, r_nominal, traj, data.init));
    else if (kind == "oracle")
      refs.push_back(oracle_filter(data.model, data.noise, traj, data.init, r_nominal));
    else
      throw ConfigError("reference: expected vb|kf|oracle, got " + kind);
  }
  return refs;
}

FilterEntry make_filter_entry(const std::string& name, const Dataset& data, const Config& cfg,
                              const RKFNetParams* net) {
  const Matrix r_nominal = data.noise.scale;
  if (name == "kf")
    return {name, [=, &data](const Trajectory& t) {
              return kf_filter(data.model, r_nominal, t, data.init);
            }};
  if (name == "kftncm")
    return {name, [&data](const Trajectory& t) {
              return kftncm_filter(data.model, data.noise, t, data.init);
            }};
  if (name == "vb") {
    const double dof = cfg.get_double("filter.vb_dof", 3.0);
    const FixedPointControl ctrl;
    return {name, [=, &data](const Trajectory& t) {
              return vb_rkf_filter(data.model, r_nominal, dof, ctrl, t, data.init);
            }};
  }
  if (name == "oracle")
    return {name, [=, &data](const Trajectory& t) {
              return oracle_filter(data.model, data.noise, t, data.init, r_nominal);
            }};
  if (name == "rkfnet") {
    if (net == nullptr) throw ConfigError("rkfnet filter requires a checkpoint");
    const RKFNetParams params = *net;
    return {name, [params, &data](const Trajectory& t) {
              std::vector<GaussianBelief> beliefs;
              for (const StepOutput& s : rkfnet_run(t.observations, data.init, params, data.model))
                beliefs.push_back(s.posterior);
              return beliefs;
            }};
  }
  throw ConfigError("filter: expected kf|kftncm|vb|oracle|rkfnet, got " + name);
}

int cmd_simulate(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  const StateSpaceModel model = model_from(cfg);
  const GaussianBelief init = init_from(cfg, model.n);
  const NoiseSpec noise = noise_from(cfg, model.m);
  std::uint64_t seed = cfg.get_int("dataset.seed", 1);
  if (opts.seed) seed = *opts.seed;
  const DatasetSplits splits = generate_datasets(
      model, init, noise, static_cast<int>(cfg.get_int("dataset.train", 3200)),
      static_cast<int>(cfg.get_int("dataset.cv", 200)),
      static_cast<int>(cfg.get_int("dataset.test", 200)),
      static_cast<int>(cfg.get_int("dataset.T", 100)), seed);
  const std::string dir = dataset_dir(cfg, opts);
  fs::create_directories(dir);
  save_dataset(splits.train, dir + "/train.ds");
  save_dataset(splits.cv, dir + "/cv.ds");
  save_dataset(splits.test, dir + "/test.ds");
  std::printf("wrote %s/{train,cv,test}.ds (%s, T=%d, seed=%llu)\n", dir.c_str(),
              noise_label(noise).c_str(), splits.train.T(),
              static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_train(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  const Dataset train_set = load_split(cfg, "train");
  const Dataset cv_set = load_split(cfg, "cv");
  const TrainingConfig tc = training_from(cfg, opts);
  std::string ref_kind = cfg.get_string("training.reference", "vb");
  if (opts.reference) ref_kind = *opts.reference;

  const std::string out_dir = opts.out ? *opts.out : cfg.get_string("output.dir", ".");
  fs::create_directories(out_dir);

  const auto references = reference_outputs(ref_kind, train_set, cfg);
  std::vector<std::unique_ptr<std::ofstream>> log_files;
  std::vector<std::ostream*> logs;
  for (int r = 0; r < tc.runs; ++r) {
    log_files.push_back(std::make_unique<std::ofstream>(
        out_dir + "/run" + std::to_string(r) + ".log", std::ios::binary | std::ios::trunc));
    logs.push_back(log_files.back().get());
  }
  const MultiRunResult result = train_restarts(train_set.model, train_set.trajectories,
                                               references, cv_set.trajectories, train_set.init,
                                               tc, logs);
  const TrainResult& best = result.runs[result.selected];
  write_checkpoint(out_dir + "/rkfnet.ckpt", best.params.to_arrays());
  std::printf("selected run %d of %d, final cv armse %.6g; checkpoint %s/rkfnet.ckpt\n",
              result.selected, tc.runs, best.history.final_cv_armse(), out_dir.c_str());
  return 0;
}

int run_report(const Config& cfg, const CommonOpts& opts, const std::vector<std::string>& names) {
  const std::string split = cfg.get_string("dataset.split", "test");
  const Dataset data = load_split(cfg, split);
  RKFNetParams net;
  bool have_net = false;
  if (cfg.has("compare.checkpoint")) {
    net = RKFNetParams::from_arrays(read_checkpoint(cfg.get_string("compare.checkpoint")));
    have_net = true;
  }
  std::vector<FilterEntry> entries;
  for (const std::string& name : names)
    entries.push_back(make_filter_entry(name, data, cfg, have_net ? &net : nullptr));
  const std::string report =
      opts.out ? *opts.out : cfg.get_string("output.report", "report.csv");
  const auto reports = compare_filters(entries, data, report);
  int failures = 0;
  for (const MetricReport& r : reports) {
    if (r.failed) {
      ++failures;
      std::printf("%-8s %s\n", r.filter.c_str(), r.error.c_str());
    } else {
      std::printf("%-8s armse %.6g (log10 %.4f) in %.3fs\n", r.filter.c_str(), r.armse_value,
                  r.log10_armse, r.wall_seconds);
    }
  }
  std::printf("report written to %s\n", report.c_str());
  return failures == static_cast<int>(reports.size()) && failures > 0 ? 2 : 0;
}

int cmd_run_filter(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  const std::string name = cfg.get_string("filter.name");
  const Config& c = cfg;
  const int rc = run_report(c, opts, {name});
  return rc;
}

int cmd_evaluate(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  if (!cfg.has("compare.checkpoint"))
    throw ConfigError("evaluate: compare.checkpoint must point at a trained model");
  return run_report(cfg, opts, {"rkfnet"});
}

int cmd_compare(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  std::vector<std::string> names{"kf", "kftncm", "vb", "oracle"};
  if (cfg.has("compare.filters")) names = cfg.get_string_list("compare.filters");
  return run_report(cfg, opts, names);
}

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--config", opts.config_path, "config file")->required();
  auto* seed = app->add_option("--seed", "master seed override");
  seed->each([&opts](const std::string& s) { opts.seed = std::stoull(s); });
  auto* out = app->add_option("--out", "output path override");
  out->each([&opts](const std::string& s) { opts.out = s; });
  auto* loss = app->add_option("--loss", "loss override: st|l1|l2");
  loss->each([&opts](const std::string& s) { opts.loss = s; });
  auto* pmin = app->add_option("--p-min", "scheduled-sampling floor override");
  pmin->each([&opts](const std::string& s) { opts.p_min = std::stod(s); });
  auto* ref = app->add_option("--reference", "reference filter override: vb|kf|oracle");
  ref->each([&opts](const std::string& s) { opts.reference = s; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rkflab: learned robust Kalman filtering laboratory"};
  app.require_subcommand(1);
  CommonOpts opts;

  auto* sim = app.add_subcommand("simulate", "generate dataset splits");
  add_common(sim, opts);
  auto* train = app.add_subcommand("train", "train the learned filter");
  add_common(train, opts);
  auto* runf = app.add_subcommand("run-filter", "run one model-based filter");
  add_common(runf, opts);
  auto* eval = app.add_subcommand("evaluate", "evaluate a trained checkpoint");
  add_common(eval, opts);
  auto* comp = app.add_subcommand("compare", "compare a set of filters");
  add_common(comp, opts);

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(opts);
    if (train->parsed()) return cmd_train(opts);
    if (runf->parsed()) return cmd_run_filter(opts);
    if (eval->parsed()) return cmd_evaluate(opts);
    if (comp->parsed()) return cmd_compare(opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const InfiniteVariance& e) {
    std::fprintf(stderr, "filter error: %s\n", e.what());
    return 2;
  } catch (const SingularInnovation& e) {
    std::fprintf(stderr, "filter error: %s\n", e.what());
    return 2;
  } catch (const NonFiniteLoss& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return 2;
  } catch (const AllRunsFailed& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
