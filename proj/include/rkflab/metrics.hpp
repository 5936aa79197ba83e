#ifndef RKFLAB_METRICS_HPP_
#define RKFLAB_METRICS_HPP_

#include <functional>
#include <string>
#include <vector>

#include "rkflab/statespace.hpp"

namespace rkflab {

struct Dataset;

/// RMSE of the two position components across trajectories at time index k
/// (0-based).
double rmse_position(const std::vector<std::vector<GaussianBelief>>& estimates,
                     const std::vector<Trajectory>& truths, int k);

/// Mean over k of rmse_position.
double armse(const std::vector<std::vector<GaussianBelief>>& estimates,
             const std::vector<Trajectory>& truths);

struct MetricReport {
  std::string filter;
  std::string noise;
  std::vector<double> per_time_rmse;
  double armse_value = 0.0;
  double log10_armse = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct FilterEntry {
  std::string name;
  std::function<std::vector<GaussianBelief>(const Trajectory&)> run;
};

/// Runs every filter over the dataset and writes the metric CSV to
/// `report_path` (schema: filter,quantity,k,value; RFC-4180). Wall-clock
/// seconds go to a sibling <report>.timing.csv so the metric report stays
/// byte-identical across reruns. A filter that throws is recorded with an
/// error row and the remaining filters proceed.
std::vector<MetricReport> compare_filters(const std::vector<FilterEntry>& filters,
                                          const Dataset& dataset,
                                          const std::string& report_path);

/// The metric rows as CSV text (what compare_filters writes).
std::string metrics_csv(const std::vector<MetricReport>& reports);

}  // namespace rkflab

#endif  // RKFLAB_METRICS_HPP_
