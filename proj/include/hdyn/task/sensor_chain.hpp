#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"
#include "hdyn/sense/observer.hpp"
#include "hdyn/sense/virtual_sensor.hpp"

namespace hdyn {

/// Wrench the tool applies to its environment, in the task frame (z along
/// the insertion or pressing direction), moments about the tool tip.
struct TaskWrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   // N
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();  // N m
};

struct SensorChainConfig {
  RobotModel model;
  Eigen::VectorXd pose;            // rad, arm configuration held during the task
  double tool_length = 0.048;      // m, flange to tip along the EE z axis
  Eigen::VectorXd noise_std;       // N m per joint
  Eigen::VectorXd bias;            // N m per joint, removed by taring
  double q_ratio = 0.05;           // Kalman process noise as a fraction of r
  int tare_samples = 100;
  Eigen::Matrix3d task_rotation;   // task frame axes in the base frame, z pointing down

  void validate() const;
};

SensorChainConfig reference_sensor_chain();

/// Joint-torque route from a contact wrench to the three-axis estimate the
/// controllers see: J' mapping at a fixed pose, noise and bias, tare, one
/// Kalman filter per joint, Jacobian solve, then back to the task frame.
class SensorChain {
 public:
  SensorChain(SensorChainConfig config, std::uint64_t seed);

  /// One sample of the estimate for the true applied wrench.
  Wrench measure(const TaskWrench& truth);

  /// Full 6-axis estimate of the last sample, task frame, about the tip.
  const TaskWrench& last_estimate() const { return last_; }

 private:
  Eigen::VectorXd joint_torque(const TaskWrench& w) const;
  TaskWrench solve(const Eigen::VectorXd& tau) const;

  SensorChainConfig config_;
  std::mt19937_64 rng_;
  Eigen::Matrix3d ee_rotation_;
  Eigen::Vector3d tip_offset_;      // base frame, flange to tip
  Eigen::MatrixXd jt_;              // J' at the held pose
  Eigen::MatrixXd jt_pinv_;
  Eigen::VectorXd tare_;
  std::vector<KalmanState> filters_;
  TaskWrench last_;
};

}  // namespace hdyn
