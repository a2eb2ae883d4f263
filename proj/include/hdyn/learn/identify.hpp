#pragma once

#include <vector>

#include "hdyn/dynamics/robot_model.hpp"
#include "hdyn/plant/trajectory.hpp"

namespace hdyn {

/// Per-joint least squares of tau_measured - inverse_dynamics onto
/// [theta_ddot, theta_dot, sign(theta_dot)]. c_m and f_c are clipped at zero.
/// Throws NumericalError naming the joint when its regressors are rank deficient.
LossParams identify_loss_params(const std::vector<TrajectoryLog>& logs, const RobotModel& model);

}  // namespace hdyn
