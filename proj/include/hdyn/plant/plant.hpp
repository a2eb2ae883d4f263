#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"
#include "hdyn/plant/trajectory.hpp"

namespace hdyn {

/// Un-modelled joint effects injected into the synthetic plant.
/// All vectors have one entry per joint.
struct ResidualSpec {
  Eigen::VectorXd stribeck_magnitude;     // N m
  Eigen::VectorXd stribeck_velocity;      // rad/s
  Eigen::VectorXd coulomb_asymmetry;      // [0, 1), forward/reverse friction imbalance
  Eigen::VectorXd coulomb_reference;      // N m, friction level the asymmetry scales
  Eigen::VectorXd ripple_amplitude;       // N m
  Eigen::VectorXd ripple_harmonic;        // cycles per radian of joint travel
  double load_dependent_loss_coeff = 0.0; // gear loss per unit transmitted torque

  static ResidualSpec zeros(std::size_t n);
  void validate(std::size_t n_joints) const;
};

/// Reference residual used by the bundled experiments.
ResidualSpec reference_residual();

/// Sum of the Stribeck, asymmetric Coulomb, position ripple and load terms.
/// Acts like a loss: it adds to the torque the motors must supply.
Eigen::VectorXd residual_torque(const ResidualSpec& spec, const JointState& state,
                                const Eigen::VectorXd& transmitted);

struct WrenchInterval {
  double t_start = 0.0;                          // s
  double t_end = 0.0;                            // s
  Eigen::Matrix<double, 6, 1> wrench = Eigen::Matrix<double, 6, 1>::Zero();  // N, N m (EE frame)
};

struct WrenchProfile {
  std::vector<WrenchInterval> schedule;

  /// Wrench active at t (zero outside every interval). Intervals are half-open.
  Eigen::Matrix<double, 6, 1> at(double t) const;
  void validate(double duration) const;
};

struct PlantConfig {
  RobotModel model;
  LossParams true_loss;
  ResidualSpec residual;
  double sample_period = 0.008;   // s
  int substeps = 4;               // RK4 steps per sample
  Eigen::VectorXd torque_noise_std;  // N m
  Eigen::VectorXd kp;             // 1/s^2
  Eigen::VectorXd kd;             // 1/s
  double divergence_limit = 0.5;  // rad

  void validate() const;
};

/// Reference robot, reference loss, zero residual, no noise.
PlantConfig ideal_plant();
/// Reference robot with the reference residual and 0.1 N m torque noise.
PlantConfig reference_plant();

class TrackingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-loop computed-torque + PD tracking of `reference` on the plant.
/// The controller uses the nominal model (robot + true_loss); residual effects
/// and the injected wrench act only on the plant.
TrajectoryLog simulate_tracking(const PlantConfig& plant, const JointTrajectory& reference,
                                const WrenchProfile* wrench, std::uint64_t seed);

/// Torque the external wrench (EE frame) produces at the joints: J' * [R f; R m].
Eigen::VectorXd external_joint_torque(const RobotModel& model, const Eigen::VectorXd& theta,
                                      const Eigen::Matrix<double, 6, 1>& wrench_ee);

/// One RK4 step of the unforced lossless chain; state is [theta; theta_dot].
Eigen::VectorXd free_motion_step(const RobotModel& model, const Eigen::VectorXd& state, double h);

}  // namespace hdyn
