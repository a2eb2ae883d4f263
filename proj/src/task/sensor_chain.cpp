#include "hdyn/task/sensor_chain.hpp"

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/kinematics.hpp"

namespace hdyn {

void SensorChainConfig::validate() const {
  model.validate();
  const auto n = static_cast<Eigen::Index>(model.n_joints());
  require(pose.size() == n && noise_std.size() == n && bias.size() == n,
          "SensorChainConfig: pose, noise and bias need one entry per joint");
  require((noise_std.array() > 0.0).all(), "SensorChainConfig: noise std must be positive");
  require(q_ratio > 0.0, "SensorChainConfig: q ratio must be positive");
  require(tare_samples >= 1, "SensorChainConfig: need at least one tare sample");
  require(tool_length >= 0.0, "SensorChainConfig: tool length must be >= 0");
  require((task_rotation.transpose() * task_rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9 &&
              task_rotation.determinant() > 0.0,
          "SensorChainConfig: task rotation must be a proper rotation");
}

SensorChainConfig reference_sensor_chain() {
  SensorChainConfig c;
  c.model = reference_robot();
  c.pose = reference_campaign().center;
  c.noise_std = Eigen::VectorXd::Constant(6, 0.1);
  c.bias = (Eigen::VectorXd(6) << 0.4, -0.3, 0.2, 0.05, -0.05, 0.02).finished();
  c.task_rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  return c;
}

SensorChain::SensorChain(SensorChainConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.validate();
  const Pose ee = forward_kinematics(config_.model, config_.pose);
  ee_rotation_ = ee.rotation;
  tip_offset_ = ee.rotation * Eigen::Vector3d(0.0, 0.0, config_.tool_length);
  jt_ = geometric_jacobian(config_.model, config_.pose).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jt_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  require(sv[sv.size() - 1] > 1e-8 * sv[0], "SensorChain: held pose is singular");
  jt_pinv_ = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(sv.size()).transpose();

  // Tare: average the unloaded reading, then filter from there.
  const auto n = jt_.rows();
  std::normal_distribution<double> unit(0.0, 1.0);
  tare_ = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < config_.tare_samples; ++s) {
    for (Eigen::Index j = 0; j < n; ++j) tare_[j] += config_.bias[j] + config_.noise_std[j] * unit(rng_);
  }
  tare_ /= config_.tare_samples;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = config_.noise_std[j] * config_.noise_std[j];
    filters_.push_back({0.0, r, config_.q_ratio * r, r});
  }
}

Eigen::VectorXd SensorChain::joint_torque(const TaskWrench& w) const {
  // The robot feels the reaction of what the tool applies.
  const Eigen::Vector3d f = -(config_.task_rotation * w.force);
  const Eigen::Vector3d m_tip = -(config_.task_rotation * w.moment);
  Vector6d base;
  base << f, m_tip + tip_offset_.cross(f);
  return jt_ * base;
}

TaskWrench SensorChain::solve(const Eigen::VectorXd& tau) const {
  const Vector6d base = jt_pinv_ * tau;
  const Eigen::Vector3d f = base.head<3>();
  const Eigen::Vector3d m_tip = base.tail<3>() - tip_offset_.cross(f);
  return {-(config_.task_rotation.transpose() * f), -(config_.task_rotation.transpose() * m_tip)};
}

Wrench SensorChain::measure(const TaskWrench& truth) {
  const Eigen::VectorXd tau = joint_torque(truth);
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd filtered(tau.size());
  for (Eigen::Index j = 0; j < tau.size(); ++j) {
    const double reading = tau[j] + config_.bias[j] + config_.noise_std[j] * unit(rng_) - tare_[j];
    filters_[static_cast<std::size_t>(j)] = kalman_step(filters_[static_cast<std::size_t>(j)], reading);
    filtered[j] = filters_[static_cast<std::size_t>(j)].tau_hat;
  }
  last_ = solve(filtered);
  return {last_.force.z(), last_.moment.x(), last_.moment.y()};
}

}  // namespace hdyn
