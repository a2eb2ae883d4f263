#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace hdyn {

/// Standard Denavit-Hartenberg row: T = Rz(theta + theta_offset) Tz(d) Tx(a) Rx(alpha).
struct DhRow {
  double a = 0.0;             // m
  double alpha = 0.0;         // rad
  double d = 0.0;             // m
  double theta_offset = 0.0;  // rad
};

struct JointLimit {
  double min = 0.0;  // rad
  double max = 0.0;  // rad
};

/// Kinematic and inertial description of a serial chain of revolute joints.
///
/// Link i is rigidly attached to DH frame i (the distal frame of joint i).
/// `link_com` and `link_inertia` are expressed in that frame; the inertia is
/// taken about the link's centre of mass.
struct RobotModel {
  std::vector<DhRow> dh;
  std::vector<double> link_mass;                // kg
  std::vector<Eigen::Vector3d> link_com;        // m
  std::vector<Eigen::Matrix3d> link_inertia;    // kg m^2
  double wrist_lump_mass = 0.0;                 // kg, mass of the last three links
  std::vector<JointLimit> joint_limits;         // rad
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};     // m/s^2, base frame

  std::size_t n_joints() const { return dh.size(); }

  /// Throws ContractError when any invariant is broken.
  void validate() const;

  /// True when every entry of theta lies inside its joint limit.
  bool within_limits(const Eigen::VectorXd& theta) const;
};

/// Rigid transform with an orthonormal rotation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
};

struct JointState {
  Eigen::VectorXd theta;       // rad
  Eigen::VectorXd theta_dot;   // rad/s
  Eigen::VectorXd theta_ddot;  // rad/s^2

  static JointState zeros(std::size_t n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
  std::size_t size() const { return static_cast<std::size_t>(theta.size()); }
};

/// Joint-level dissipation coefficients, one entry per joint.
struct LossParams {
  Eigen::VectorXd b_m;  // N m s^2/rad, acceleration-proportional loss
  Eigen::VectorXd c_m;  // N m s/rad, viscous loss
  Eigen::VectorXd f_c;  // N m, Coulomb magnitude

  static LossParams zeros(std::size_t n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
  std::size_t size() const { return static_cast<std::size_t>(b_m.size()); }
  void validate(std::size_t n_joints) const;
};

void validate_state(const RobotModel& model, const JointState& state);

/// Planar chain of revolute joints about z with unit-free link lengths.
/// Masses sit at the link tips as point masses plus a small inertia.
RobotModel planar_arm(const std::vector<double>& lengths, const std::vector<double>& masses,
                      double gravity = 9.81);

/// TM5-700-like reference manipulator with bundled inertial parameters.
RobotModel reference_robot();

/// Nominal loss parameters of the reference manipulator.
LossParams reference_loss();

/// Model of joints 1-3 only, with the wrist links replaced by a point mass
/// of `wrist_lump_mass` at the origin of frame 3.
RobotModel lumped_arm(const RobotModel& model);

}  // namespace hdyn
