#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"

namespace hdyn {

/// World placement of every DH frame of a chain. Index 0 is the base frame,
/// index i the distal frame of joint i.
struct ChainFrames {
  std::vector<Eigen::Matrix3d> rotation;
  std::vector<Eigen::Vector3d> origin;

  /// Axis of joint i (1-based) is the z axis of frame i-1.
  Eigen::Vector3d joint_axis(std::size_t joint) const { return rotation[joint - 1].col(2); }
};

Eigen::Matrix4d dh_transform(const DhRow& row, double theta);

ChainFrames chain_frames(const RobotModel& model, const Eigen::VectorXd& theta);

Pose forward_kinematics(const RobotModel& model, const Eigen::VectorXd& theta);

/// 6 x n geometric Jacobian of the end-effector origin in the base frame.
/// Rows 0-2 map joint rates to linear velocity, rows 3-5 to angular velocity.
Eigen::MatrixXd geometric_jacobian(const RobotModel& model, const Eigen::VectorXd& theta);
Eigen::MatrixXd geometric_jacobian(const ChainFrames& frames);

}  // namespace hdyn
