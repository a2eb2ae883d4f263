#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hdyn/plant/trajectory.hpp"

namespace hdyn {

/// Which torque channels a model predicts and which states it reads.
///
///   Joints123  per stamp: theta1..3, thetad1..3, thetadd1..3         (9 values)
///   JointK     per stamp: theta1..6, thetad_K, thetadd_K             (8 values)
///
/// A window is flattened oldest stamp first.
enum class ChannelGroup { Joints123, Joint4, Joint5, Joint6 };

std::vector<int> group_channels(ChannelGroup group);  // zero-based joint indices
int values_per_stamp(ChannelGroup group);
std::string to_string(ChannelGroup group);
ChannelGroup group_from_string(const std::string& name);

/// Per-column z-score statistics. Columns with std <= 1e-12 pass through unscaled.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  bool empty() const { return mean.size() == 0; }
};

/// Feature rows with one label column per channel of the group.
struct Dataset {
  Eigen::MatrixXd features;  // rows x columns
  Eigen::MatrixXd labels;    // rows x channels, N m
  Normalization normalization;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index columns() const { return features.cols(); }
  void validate() const;
};

/// Flattened window ending at sample k (requires k >= window_len - 1).
void window_features(const TrajectoryLog& log, ChannelGroup group, int window_len, Eigen::Index k,
                     double* out);

/// One row per sample k >= window_len - 1. Labels are the measured torques of the
/// group's channels; logs without torques give zero labels.
Dataset build_features(const TrajectoryLog& log, ChannelGroup group, int window_len);
Dataset build_features(const std::vector<TrajectoryLog>& logs, ChannelGroup group, int window_len);

Normalization fit_normalization(const Eigen::MatrixXd& features);
void apply_normalization(const Normalization& stats, Eigen::MatrixXd& features);
void invert_normalization(const Normalization& stats, Eigen::MatrixXd& features);

/// Fits z-score statistics and scales the features in place of a copy.
Dataset normalize(const Dataset& ds);
Dataset denormalize(const Dataset& ds);

enum class SplitMode { Block, Row };

struct LogSplit {
  std::vector<TrajectoryLog> train;
  std::vector<TrajectoryLog> validation;
};

/// Contiguous split: whole logs go to one side; a single log is cut in time.
LogSplit split_blocks(const std::vector<TrajectoryLog>& logs, double train_fraction);

struct DatasetSplit {
  Dataset train;
  Dataset validation;
};

/// Shuffled row split. Overlapping windows make this optimistic.
DatasetSplit split_rows(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Copies the selected rows.
Dataset select_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows);

}  // namespace hdyn
