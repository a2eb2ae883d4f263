#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdyn/learn/hybrid.hpp"

namespace hdyn {

double metric_rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);
double metric_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);
double metric_mae(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);

/// Summary of per-trajectory RMSE values. `std` is the population deviation.
struct ModelStats {
  std::string name;
  std::vector<double> per_trajectory;  // N m
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
  double min = 0.0;
};

ModelStats summarize(const std::string& name, const std::vector<double>& values);

/// RMSE pooled over the group's channels, per trajectory. All models are scored
/// on the samples where the widest window is full, so short windows gain nothing.
std::vector<ModelStats> evaluate_models(const std::vector<HybridModel>& models,
                                        const std::vector<std::string>& names,
                                        const std::vector<TrajectoryLog>& logs);

void write_report_csv(const std::vector<ModelStats>& stats, std::ostream& out);
std::string format_report_table(const std::vector<ModelStats>& stats);

}  // namespace hdyn
