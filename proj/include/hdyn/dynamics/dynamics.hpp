#pragma once

#include <Eigen/Dense>

#include "hdyn/dynamics/kinematics.hpp"
#include "hdyn/dynamics/robot_model.hpp"

namespace hdyn {

/// Recursive Newton-Euler pass on precomputed frames. Returns the joint torques
/// that realise (theta_dot, theta_ddot) under `gravity`.
Eigen::VectorXd rnea(const RobotModel& model, const ChainFrames& frames,
                     const Eigen::VectorXd& theta_dot, const Eigen::VectorXd& theta_ddot,
                     const Eigen::Vector3d& gravity);

/// M(theta) theta_ddot + C(theta, theta_dot) theta_dot + G(theta), without losses.
Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& state);

Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& theta);
Eigen::MatrixXd mass_matrix(const RobotModel& model, const ChainFrames& frames);
Eigen::VectorXd gravity_torque(const RobotModel& model, const Eigen::VectorXd& theta);

/// C(theta, theta_dot) theta_dot + G(theta).
Eigen::VectorXd bias_torque(const RobotModel& model, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& theta_dot);

/// B_m theta_ddot + C_m theta_dot + f_c sign(theta_dot), with sign(0) = 0.
Eigen::VectorXd loss_torque(const LossParams& params, const JointState& state);

/// Solves (M + diag(b_m)) theta_ddot = tau - C theta_dot - G - C_m theta_dot - f_c sign(theta_dot).
/// `loss` may be null for a lossless chain. Throws NumericalError when the
/// effective mass matrix is singular.
Eigen::VectorXd forward_dynamics(const RobotModel& model, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& theta_dot, const Eigen::VectorXd& tau,
                                 const LossParams* loss);

struct Energy {
  double kinetic = 0.0;    // J
  double potential = 0.0;  // J
  double total() const { return kinetic + potential; }
};

Energy mechanical_energy(const RobotModel& model, const Eigen::VectorXd& theta,
                         const Eigen::VectorXd& theta_dot);

}  // namespace hdyn
