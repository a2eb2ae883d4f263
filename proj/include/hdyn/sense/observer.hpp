#pragma once

#include <Eigen/Dense>
#include <deque>
#include <iosfwd>
#include <vector>

#include "hdyn/learn/hybrid.hpp"
#include "hdyn/plant/trajectory.hpp"

namespace hdyn {

/// Scalar random-walk Kalman filter state for one joint.
struct KalmanState {
  double tau_hat = 0.0;  // N m
  double p = 1.0;        // (N m)^2
  double q = 1e-4;       // (N m)^2, process noise
  double r = 1e-2;       // (N m)^2, measurement noise

  void validate() const;
};

KalmanState kalman_step(KalmanState state, double measurement);

/// Gain the filter converges to for fixed q and r.
double kalman_steady_gain(double q, double r);

/// Steps a steady-state filter needs to close `fraction` of a step change.
int kalman_settle_steps(double q, double r, double fraction);

/// External torque convention used throughout: tau_ext = tau_free - tau_measured,
/// positive when the environment pushes the joint forward.
Eigen::VectorXd external_torque_raw(const Eigen::VectorXd& tau_measured, const Eigen::VectorXd& tau_free);

/// Raw external torque over a log, n x N. Columns before the suite's first full
/// window are NaN.
Eigen::MatrixXd external_torque_raw(const ModelSuite& free_model, const TrajectoryLog& log);

struct ObserverConfig {
  Eigen::VectorXd q;  // (N m)^2 per joint
  Eigen::VectorXd r;  // (N m)^2 per joint
  double p0 = 1.0;    // initial covariance

  void validate() const;
};

/// r from the per-joint variance of raw external torque on a zero-wrench run,
/// q = q_ratio * r. NaN columns are skipped.
ObserverConfig calibrate_observer(const Eigen::MatrixXd& raw_zero_wrench, double q_ratio = 0.01);

/// Runs one filter per joint over raw external torque. The filter starts at the
/// first finite column; earlier columns stay NaN.
Eigen::MatrixXd filter_external_torque(const Eigen::MatrixXd& raw, const ObserverConfig& config);

struct ObserverRun {
  Eigen::VectorXd times;
  Eigen::MatrixXd raw;       // n x N, N m
  Eigen::MatrixXd filtered;  // n x N, N m
};

ObserverRun observe_log(const ModelSuite& free_model, const ObserverConfig& config, const TrajectoryLog& log);

/// Sample-by-sample observer for streaming use.
class StreamingObserver {
 public:
  StreamingObserver(ModelSuite free_model, ObserverConfig config);

  /// Feeds one sample; returns false until the model window is full.
  bool push(double t, const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_dot,
            const Eigen::VectorXd& theta_ddot, const Eigen::VectorXd& tau_measured);

  const Eigen::VectorXd& raw() const { return raw_; }
  const Eigen::VectorXd& filtered() const { return filtered_; }

 private:
  ModelSuite model_;
  ObserverConfig config_;
  std::vector<KalmanState> filters_;
  bool started_ = false;
  std::deque<Eigen::VectorXd> history_;  // stacked [t; theta; theta_dot; theta_ddot; tau]
  Eigen::VectorXd raw_;
  Eigen::VectorXd filtered_;
};

/// Per-row CSV: t, tauext_raw_i, tauext_hat_i, and optional wrench columns (fz, mx, my).
void write_observer_csv(const ObserverRun& run, const Eigen::MatrixXd* wrench3, std::ostream& out);

}  // namespace hdyn
