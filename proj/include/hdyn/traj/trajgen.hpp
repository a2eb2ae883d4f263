#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"
#include "hdyn/plant/trajectory.hpp"
#include "hdyn/traj/obb.hpp"

namespace hdyn {

/// Per-joint digitised angles plus the speed factors every leg is run at.
struct GridSpec {
  std::vector<std::vector<double>> per_joint_angles;  // rad, sorted, both range ends included
  std::vector<double> speeds;                         // > 0

  void validate(const std::vector<JointLimit>& ranges) const;
};

/// Evenly spaced grid with segments[i] + 1 angles per joint, ends included.
GridSpec make_grid(const std::vector<JointLimit>& ranges, const std::vector<int>& segments,
                   std::vector<double> speeds);

/// Cartesian product of the grid. Throws ContractError above `cap` configurations.
std::vector<Eigen::VectorXd> digitize(const GridSpec& grid, std::size_t cap = 1'000'000);
std::vector<Eigen::VectorXd> digitize(const std::vector<JointLimit>& ranges, int segments_per_joint,
                                      std::size_t cap = 1'000'000);

struct MotionLimits {
  Eigen::VectorXd v_max;               // rad/s
  Eigen::VectorXd a_max;               // rad/s^2
  double sample_period = 0.008;        // s
  double min_displacement = 1e-6;      // rad
};

MotionLimits reference_motion_limits();

/// Quintic rest-to-rest leg. Duration is the slowest joint's |delta| / (speed v_max),
/// raised until every joint respects v_max and a_max, then rounded up to a whole
/// number of sample periods. Throws ContractError when start == end or the leg is
/// shorter than two samples.
JointTrajectory time_parameterize(const Eigen::VectorXd& start, const Eigen::VectorXd& end,
                                  double speed, const MotionLimits& limits);

/// Shortest quintic duration that respects v_max and a_max for this displacement.
double quintic_min_duration(const Eigen::VectorXd& delta, const MotionLimits& limits);

/// Samples a quintic of the given duration between two rest configurations.
JointTrajectory sample_quintic(const Eigen::VectorXd& start, const Eigen::VectorXd& end,
                               double duration, double sample_period);

enum class PairMode { Ordered, Unordered };

struct Leg {
  std::size_t from = 0;
  std::size_t to = 0;
  double speed = 1.0;
  bool transfer = false;  // joining move inserted to keep the chain continuous
};

struct TrajectorySet {
  std::vector<Eigen::VectorXd> configs;
  std::vector<Leg> legs;

  /// Number of non-transfer legs.
  std::size_t pair_legs() const;
};

/// Chains every ordered (or unordered) configuration pair at every speed into
/// one continuous sequence of legs.
TrajectorySet enumerate_legs(const std::vector<Eigen::VectorXd>& configs,
                             const std::vector<double>& speeds, PairMode mode = PairMode::Ordered);

/// Concatenated reference for the whole chain.
JointTrajectory sample_set(const TrajectorySet& set, const MotionLimits& limits);

/// Collision-free grid configurations, optionally thinned to `keep` entries by a
/// seeded draw that preserves grid order.
std::vector<Eigen::VectorXd> select_configurations(const RobotModel& model, const GridSpec& grid,
                                                   const LinkBoxes& boxes,
                                                   const std::vector<Obb>& obstacles,
                                                   std::size_t keep, std::uint64_t seed,
                                                   std::size_t cap = 1'000'000);

}  // namespace hdyn
