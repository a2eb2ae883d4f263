#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace hdyn {

/// Uniformly sampled joint reference. Columns are samples.
struct JointTrajectory {
  double sample_period = 0.008;  // s
  Eigen::MatrixXd theta;         // n x N, rad
  Eigen::MatrixXd theta_dot;     // n x N, rad/s
  Eigen::MatrixXd theta_ddot;    // n x N, rad/s^2

  Eigen::Index n_joints() const { return theta.rows(); }
  Eigen::Index n_samples() const { return theta.cols(); }
  double duration() const { return sample_period * static_cast<double>(n_samples() - 1); }

  /// Appends `other`, dropping its first sample when it coincides with our last.
  void append(const JointTrajectory& other);
  /// Constant-pose trajectory.
  static JointTrajectory stationary(const Eigen::VectorXd& theta, Eigen::Index samples,
                                    double sample_period);
};

/// Time series logged from the plant; the dataset currency of the toolkit.
/// Columns are samples. `wrench_true` is the end-effector-frame wrench
/// (fx, fy, fz, mx, my, mz) applied by the environment.
struct TrajectoryLog {
  Eigen::VectorXd times;               // s
  Eigen::MatrixXd theta;               // n x N
  Eigen::MatrixXd theta_dot;           // n x N
  Eigen::MatrixXd theta_ddot;          // n x N
  Eigen::MatrixXd tau_measured;        // n x N, N m
  Eigen::MatrixXd tau_external_true;   // n x N, N m
  Eigen::MatrixXd wrench_true;         // 6 x N
  bool has_torques = true;             // false for reference-only logs

  Eigen::Index n_joints() const { return theta.rows(); }
  Eigen::Index n_samples() const { return times.size(); }
  double sample_period() const { return n_samples() > 1 ? times[1] - times[0] : 0.0; }

  static TrajectoryLog allocate(Eigen::Index n_joints, Eigen::Index n_samples);
  static TrajectoryLog from_reference(const JointTrajectory& ref, double t0 = 0.0);

  /// Samples [begin, end).
  TrajectoryLog slice(Eigen::Index begin, Eigen::Index end) const;

  /// Throws ContractError if series lengths differ or the time step is not uniform.
  void validate() const;
};

void write_log_csv(const TrajectoryLog& log, std::ostream& out);
void write_log_csv(const TrajectoryLog& log, const std::string& path);
TrajectoryLog read_log_csv(std::istream& in);
TrajectoryLog read_log_csv(const std::string& path);

/// Replaces logged accelerations by a central difference of theta_dot
/// followed by a first-order low-pass with the given cutoff (Hz).
void estimate_acceleration(TrajectoryLog& log, double cutoff_hz);

}  // namespace hdyn
