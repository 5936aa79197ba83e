#include "rkflab/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sys/utsname.h>

#include "rkflab/dataset.hpp"
#include "rkflab/errors.hpp"

namespace rkflab {

namespace {

std::string fmt_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string timing_path_for(const std::string& report_path) {
  const std::string suffix = ".csv";
  if (report_path.size() > suffix.size() &&
      report_path.compare(report_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return report_path.substr(0, report_path.size() - suffix.size()) + ".timing.csv";
  return report_path + ".timing.csv";
}

std::string machine_descriptor() {
  utsname u{};
  if (uname(&u) != 0) return "unknown";
  return std::string(u.sysname) + " " + u.machine;
}

}  // namespace

double rmse_position(const std::vector<std::vector<GaussianBelief>>& estimates,
                     const std::vector<Trajectory>& truths, int k) {
  const std::size_t n = estimates.size();
  if (n == 0 || n != truths.size())
    throw DimensionMismatch("rmse_position: need matching, non-empty estimate/truth sets");
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (k >= static_cast<int>(estimates[j].size()) || k >= truths[j].length())
      throw DimensionMismatch("rmse_position: time index out of range");
    const Vector& est = estimates[j][k].mean;
    const Vector& truth = truths[j].states[k];
    const double dx = est[0] - truth[0];
    const double dy = est[1] - truth[1];
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double armse(const std::vector<std::vector<GaussianBelief>>& estimates,
             const std::vector<Trajectory>& truths) {
  const int T = truths.empty() ? 0 : truths.front().length();
  if (T == 0) throw DimensionMismatch("armse: empty truth set");
  double acc = 0.0;
  for (int k = 0; k < T; ++k) acc += rmse_position(estimates, truths, k);
  return acc / T;
}

std::string metrics_csv(const std::vector<MetricReport>& reports) {
  std::string out = "filter,quantity,k,value\r\n";
  for (const MetricReport& r : reports) {
    if (r.failed) {
      out += r.filter + ",error,," + r.error + "\r\n";
      continue;
    }
    for (std::size_t k = 0; k < r.per_time_rmse.size(); ++k)
      out += r.filter + ",rmse," + std::to_string(k + 1) + "," + fmt_value(r.per_time_rmse[k]) +
             "\r\n";
    out += r.filter + ",armse,," + fmt_value(r.armse_value) + "\r\n";
    out += r.filter + ",log10_armse,," + fmt_value(r.log10_armse) + "\r\n";
  }
  return out;
}

std::vector<MetricReport> compare_filters(const std::vector<FilterEntry>& filters,
                                          const Dataset& dataset,
                                          const std::string& report_path) {
  std::vector<MetricReport> reports;
  reports.reserve(filters.size());
  const std::string noise = noise_label(dataset.noise);
  for (const FilterEntry& entry : filters) {
    MetricReport report;
    report.filter = entry.name;
    report.noise = noise;
    try {
      std::vector<std::vector<GaussianBelief>> estimates;
      estimates.reserve(dataset.trajectories.size());
      const auto t0 = std::chrono::steady_clock::now();
      for (const Trajectory& traj : dataset.trajectories) estimates.push_back(entry.run(traj));
      const auto t1 = std::chrono::steady_clock::now();
      report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
      const int T = dataset.T();
      report.per_time_rmse.reserve(T);
      for (int k = 0; k < T; ++k)
        report.per_time_rmse.push_back(rmse_position(estimates, dataset.trajectories, k));
      report.armse_value = armse(estimates, dataset.trajectories);
      report.log10_armse = std::log10(report.armse_value);
    } catch (const InfiniteVariance&) {
      report.failed = true;
      report.error = "InfiniteVariance";
    } catch (const SingularInnovation&) {
      report.failed = true;
      report.error = "SingularInnovation";
    } catch (const std::exception&) {
      report.failed = true;
      report.error = "FilterFailure";
    }
    reports.push_back(std::move(report));
  }

  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("compare_filters: cannot open " + report_path);
    out << metrics_csv(reports);

    std::ofstream timing(timing_path_for(report_path), std::ios::binary | std::ios::trunc);
    timing << "filter,seconds,machine\r\n";
    for (const MetricReport& r : reports)
      if (!r.failed)
        timing << r.filter << "," << fmt_value(r.wall_seconds) << "," << machine_descriptor()
               << "\r\n";
  }
  return reports;
}

}  // namespace rkflab
