#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"
#include "hdyn/learn/gbt.hpp"
#include "hdyn/plant/plant.hpp"
#include "hdyn/plant/trajectory.hpp"
#include "hdyn/traj/trajgen.hpp"

namespace hdyn {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Three-axis end-effector estimate, EE frame.
struct Wrench {
  double f_z = 0.0;  // N
  double m_x = 0.0;  // N m
  double m_y = 0.0;  // N m
};

struct JacobianWrench {
  Vector6d wrench;           // base frame (fx, fy, fz, mx, my, mz), moments about the EE origin
  double condition_number;   // of J
};

/// Least-squares (minimum-norm) solution of J' w = tau_ext. Throws NumericalError
/// with the weakest wrench direction in the message when J is rank deficient.
JacobianWrench wrench_from_jacobian(const RobotModel& model, const Eigen::VectorXd& theta,
                                    const Eigen::VectorXd& tau_ext, double max_condition = 1e8);

/// Re-expresses a base-frame wrench in a frame with the given orientation.
Vector6d rotate_wrench(const Vector6d& wrench_base, const Eigen::Matrix3d& frame_rotation);

/// (fz, mx, my) of an EE-frame 6-vector.
Wrench three_axis(const Vector6d& wrench_ee);

/// Analytic estimate over a log from filtered external torque, 3 x N (fz, mx, my) in the EE frame.
Eigen::MatrixXd analytic_wrench(const RobotModel& model, const TrajectoryLog& log,
                                const Eigen::MatrixXd& tau_ext);

/// Which axis a learned map estimates and which filtered external torques it reads:
///   FZ  theta1..6, tau_ext1..3
///   MX  theta1..6, tau_ext5
///   MY  theta1..6, tau_ext4
enum class WrenchAxis { FZ = 0, MX = 1, MY = 2 };

std::vector<int> axis_torque_channels(WrenchAxis axis);

/// Flattened windows (oldest stamp first) for one axis, one row per sample whose
/// window has finite external torque. `sample_index` receives the row sample indices.
Eigen::MatrixXd wrench_features(const TrajectoryLog& log, const Eigen::MatrixXd& tau_ext, WrenchAxis axis,
                                int window_len, std::vector<Eigen::Index>* sample_index);

struct VirtualWrenchModel {
  int window_len = 10;
  std::array<GbtEnsemble, 3> maps;  // indexed by WrenchAxis
};

/// Observer output paired with the log it came from.
struct ObservedLog {
  TrajectoryLog log;
  Eigen::MatrixXd tau_ext;  // filtered, n x N
};

VirtualWrenchModel train_wrench_maps(const std::vector<ObservedLog>& data, int window_len,
                                     const GbtHyperParams& params);

/// 3 x N (fz, mx, my); columns without a full window are NaN.
Eigen::MatrixXd predict_wrench(const VirtualWrenchModel& model, const ObservedLog& data);

nlohmann::json to_json(const VirtualWrenchModel& model);
VirtualWrenchModel wrench_model_from_json(const nlohmann::json& j);

/// Mean absolute error per axis between predictions and the logged wrench,
/// over columns where the prediction is finite.
Eigen::Vector3d wrench_mae(const Eigen::MatrixXd& predicted, const TrajectoryLog& log);

/// Poses scattered around a working pose with piecewise-constant EE wrenches;
/// the data source for the learned maps.
struct CampaignSpec {
  Eigen::VectorXd center;         // rad
  Eigen::VectorXd spread;         // rad, uniform half range per joint
  int poses = 12;
  double dwell = 1.0;             // s held at each pose
  double speed = 0.4;             // leg speed factor
  double wrench_hold = 0.5;       // s per wrench level
  double fz_max = 40.0;           // N, levels drawn from [0, fz_max]
  double moment_max = 3.0;        // N m, levels drawn from [-moment_max, moment_max]
  bool zero_wrench = false;

  void validate(std::size_t n_joints) const;
};

CampaignSpec reference_campaign();

struct WrenchCampaign {
  JointTrajectory reference;
  WrenchProfile wrench;
};

WrenchCampaign make_wrench_campaign(const CampaignSpec& spec, const MotionLimits& limits, std::uint64_t seed);

}  // namespace hdyn
