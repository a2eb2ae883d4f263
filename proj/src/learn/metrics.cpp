#include "hdyn/learn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

void check_pair(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
  require(pred.size() >= 1, "metric: empty input");
  require(pred.size() == actual.size(), "metric: prediction and reference lengths differ");
}

}  // namespace

double metric_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
  check_pair(pred, actual);
  return (pred - actual).squaredNorm() / static_cast<double>(pred.size());
}

double metric_rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
  return std::sqrt(metric_mse(pred, actual));
}

double metric_mae(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
  check_pair(pred, actual);
  return (pred - actual).cwiseAbs().mean();
}

ModelStats summarize(const std::string& name, const std::vector<double>& values) {
  require(!values.empty(), "summarize: no values");
  ModelStats s;
  s.name = name;
  s.per_trajectory = values;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  s.max = *std::max_element(values.begin(), values.end());
  s.min = *std::min_element(values.begin(), values.end());
  return s;
}

std::vector<ModelStats> evaluate_models(const std::vector<HybridModel>& models,
                                        const std::vector<std::string>& names,
                                        const std::vector<TrajectoryLog>& logs) {
  require(!models.empty(), "evaluate_models: no models");
  require(names.size() == models.size(), "evaluate_models: one name per model");
  require(!logs.empty(), "evaluate_models: no trajectories");
  int window = 1;
  for (const auto& m : models) {
    require(m.group == models[0].group, "evaluate_models: models must share a channel group");
    window = std::max(window, m.window_len);
  }
  const auto channels = group_channels(models[0].group);
  std::vector<std::vector<double>> rmse(models.size());
  for (const auto& log : logs) {
    require(log.has_torques, "evaluate_models: trajectories need measured torques");
    require(log.n_samples() >= window, "evaluate_models: trajectory shorter than the widest window");
    const Eigen::Index first = window - 1;
    const Eigen::Index count = log.n_samples() - first;
    Eigen::VectorXd actual(count * static_cast<Eigen::Index>(channels.size()));
    for (std::size_t c = 0; c < channels.size(); ++c) {
      actual.segment(static_cast<Eigen::Index>(c) * count, count) =
          log.tau_measured.row(channels[c]).segment(first, count).transpose();
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      const Eigen::MatrixXd pred = predict_log(models[m], log);
      Eigen::VectorXd flat(actual.size());
      for (std::size_t c = 0; c < channels.size(); ++c) {
        flat.segment(static_cast<Eigen::Index>(c) * count, count) =
            pred.row(static_cast<Eigen::Index>(c)).segment(first, count).transpose();
      }
      rmse[m].push_back(metric_rmse(flat, actual));
    }
  }
  std::vector<ModelStats> out;
  for (std::size_t m = 0; m < models.size(); ++m) out.push_back(summarize(names[m], rmse[m]));
  return out;
}

void write_report_csv(const std::vector<ModelStats>& stats, std::ostream& out) {
  out << "model,mean,std,max,min,trajectories\n";
  char buf[256];
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%zu\n", s.name.c_str(), s.mean, s.std,
                  s.max, s.min, s.per_trajectory.size());
    out << buf;
  }
}

std::string format_report_table(const std::vector<ModelStats>& stats) {
  std::size_t width = 5;
  for (const auto& s : stats) width = std::max(width, s.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %10s\n", static_cast<int>(width), "model", "mean",
                "std", "max", "min");
  out += buf;
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof buf, "%-*s %10.4f %10.4f %10.4f %10.4f\n", static_cast<int>(width),
                  s.name.c_str(), s.mean, s.std, s.max, s.min);
    out += buf;
  }
  return out;
}

}  // namespace hdyn
