#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdyn/learn/hybrid.hpp"
#include "hdyn/plant/trajectory.hpp"
#include "hdyn/traj/trajgen.hpp"

namespace hdyn {

/// Rest-to-rest start -> via -> end motion, one quintic per segment, so
/// velocity and acceleration vanish at all three waypoints.
struct ViaTrajectory {
  Eigen::VectorXd start, via, end;   // rad
  std::array<double, 2> durations{}; // s, whole multiples of sample_period
  double sample_period = 0.008;      // s

  void validate() const;
  double elapsed() const { return durations[0] + durations[1]; }
  JointTrajectory sample() const;
  ViaTrajectory with_durations(const std::array<double, 2>& d) const;
};

nlohmann::json to_json(const ViaTrajectory& t);
ViaTrajectory via_trajectory_from_json(const nlohmann::json& j);

struct RewardConfig {
  double a = -10.0;           // penalty gain per N m of violation
  double b = 200.0;           // reward per second saved
  Eigen::VectorXd tau_limit;  // N m per joint

  void validate() const;
};

nlohmann::json to_json(const RewardConfig& c);
RewardConfig reward_config_from_json(const nlohmann::json& j);

/// Any violation: a * sum over violating joints of |limit - peak|.
/// Otherwise b * (baseline_elapsed - elapsed).
double reward(const Eigen::VectorXd& peak, double elapsed, double baseline_elapsed, const RewardConfig& cfg);

bool within_limits(const Eigen::VectorXd& peak, const Eigen::VectorXd& limit);

/// Per-joint max |predicted torque| over the sampled trajectory. The model's
/// window is filled by holding the start pose beforehand.
Eigen::VectorXd peak_torque(const ModelSuite& model, const ViaTrajectory& traj);
Eigen::VectorXd peak_torque(const ModelSuite& model, const JointTrajectory& traj);

/// Shortest segment durations that respect the velocity and acceleration
/// caps, rounded up to the sample grid.
std::array<double, 2> duration_floor(const ViaTrajectory& traj, const MotionLimits& limits);

struct PlannerOptions {
  int budget = 320;           // model evaluations
  int population = 16;
  int elites = 4;
  double initial_std = 0.25;  // on the duration scaling
  double min_std = 0.01;
  double smoothing = 0.7;     // weight of the elite statistics in each update
  MotionLimits limits = reference_motion_limits();
  std::uint64_t seed = 0;

  void validate(std::size_t n_joints) const;
};

struct PlanResult {
  ViaTrajectory baseline;
  ViaTrajectory plan;
  double elapsed_before = 0.0;
  double elapsed_after = 0.0;
  Eigen::VectorXd peak_before;
  Eigen::VectorXd peak_after;
  std::vector<double> reward_trace;  // best reward so far, one entry per evaluation
  int evaluations = 0;
  bool success = false;

  double reduction() const { return elapsed_before - elapsed_after; }
  double reduction_fraction() const { return reduction() / elapsed_before; }
};

/// Cross-entropy search over per-segment duration scalings in
/// [floor / baseline, 1]. Infeasible candidates steer the search but are
/// never returned. Throws ContractError when the baseline already violates.
PlanResult optimize_speed(const ModelSuite& model, const ViaTrajectory& baseline, const RewardConfig& cfg,
                          const PlannerOptions& options);

nlohmann::json to_json(const PlanResult& r);

struct SpeedBenchmark {
  std::vector<std::string> names;
  std::vector<ViaTrajectory> trajectories;
  RewardConfig reward;
};

/// Three start-via-end motions of the reference arm with baselines of
/// 1.544, 1.312 and 1.640 s and shared per-joint torque limits.
SpeedBenchmark reference_speed_benchmark();

}  // namespace hdyn
