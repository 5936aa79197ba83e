#ifndef RKFLAB_DATASET_HPP_
#define RKFLAB_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "rkflab/noise.hpp"
#include "rkflab/statespace.hpp"

namespace rkflab {

/// One split of simulated trajectories plus everything needed to rerun or
/// extend it: the model (with the shared initial belief), the noise family and
/// the master seed.
struct Dataset {
  StateSpaceModel model;
  GaussianBelief init;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::string split;  // train | cv | test
  std::vector<Trajectory> trajectories;

  int size() const { return static_cast<int>(trajectories.size()); }
  int T() const { return trajectories.empty() ? 0 : trajectories.front().length(); }
};

struct DatasetSplits {
  Dataset train;
  Dataset cv;
  Dataset test;
};

/// Simulates the three splits with disjoint per-split, per-trajectory random
/// streams derived from the master seed.
DatasetSplits generate_datasets(const StateSpaceModel& model, const GaussianBelief& init,
                                const NoiseSpec& noise, int n_train, int n_cv, int n_test, int T,
                                std::uint64_t seed);

// One file per split: "# rkflab-dataset v1" header line, one JSON metadata
// line, then per trajectory a base64 line of the states block and a base64
// line of the observations block (little-endian float64, row-major).
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Compact noise tag used in reports, e.g. "gm-u100", "st-v6", "sgas-a0.5".
std::string noise_label(const NoiseSpec& spec);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace rkflab

#endif  // RKFLAB_DATASET_HPP_
