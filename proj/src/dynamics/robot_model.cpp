#include "hdyn/dynamics/robot_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Eigen::Matrix3d diag3(double x, double y, double z) { return Eigen::Vector3d(x, y, z).asDiagonal(); }

}  // namespace

void RobotModel::validate() const {
  const std::size_t n = n_joints();
  require(n >= 1, "robot model needs at least one joint");
  require(link_mass.size() == n && link_com.size() == n && link_inertia.size() == n &&
              joint_limits.size() == n,
          "robot model: per-link arrays must all have n_joints entries");
  require(wrist_lump_mass >= 0.0, "robot model: wrist_lump_mass must be >= 0");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = "link " + std::to_string(i + 1);
    require(link_mass[i] >= 0.0, tag + ": mass must be >= 0");
    require(joint_limits[i].min < joint_limits[i].max, tag + ": joint limit min must be < max");
    const Eigen::Matrix3d& I = link_inertia[i];
    require((I - I.transpose()).cwiseAbs().maxCoeff() <= 1e-12, tag + ": inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(I);
    require(eig.eigenvalues().minCoeff() >= -1e-12, tag + ": inertia must be positive semi-definite");
  }
  require(gravity.allFinite(), "robot model: gravity must be finite");
}

bool RobotModel::within_limits(const Eigen::VectorXd& theta) const {
  for (std::size_t i = 0; i < n_joints(); ++i) {
    if (theta[i] < joint_limits[i].min || theta[i] > joint_limits[i].max) return false;
  }
  return true;
}

void LossParams::validate(std::size_t n_joints) const {
  require(static_cast<std::size_t>(b_m.size()) == n_joints &&
              static_cast<std::size_t>(c_m.size()) == n_joints &&
              static_cast<std::size_t>(f_c.size()) == n_joints,
          "loss params: expected one coefficient per joint");
  require((c_m.array() >= 0.0).all(), "loss params: c_m must be >= 0");
  require((f_c.array() >= 0.0).all(), "loss params: f_c must be >= 0");
}

void validate_state(const RobotModel& model, const JointState& state) {
  const auto n = static_cast<Eigen::Index>(model.n_joints());
  require(state.theta.size() == n && state.theta_dot.size() == n && state.theta_ddot.size() == n,
          "joint state: dimension mismatch with robot model (expected " + std::to_string(n) + ")");
  require(state.theta.allFinite() && state.theta_dot.allFinite() && state.theta_ddot.allFinite(),
          "joint state: entries must be finite");
}

RobotModel planar_arm(const std::vector<double>& lengths, const std::vector<double>& masses,
                      double gravity) {
  require(lengths.size() == masses.size() && !lengths.empty(), "planar_arm: lengths/masses mismatch");
  RobotModel m;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    m.dh.push_back({lengths[i], 0.0, 0.0, 0.0});
    m.link_mass.push_back(masses[i]);
    m.link_com.emplace_back(0.0, 0.0, 0.0);  // point mass at the distal joint
    m.link_inertia.push_back(Eigen::Matrix3d::Zero());
    m.joint_limits.push_back({-std::numbers::pi, std::numbers::pi});
  }
  // Gravity along -y so the planar chain (rotating about z) feels it.
  m.gravity = Eigen::Vector3d(0.0, -gravity, 0.0);
  return m;
}

RobotModel reference_robot() {
  RobotModel m;
  m.dh = {
      {0.0, -90.0 * kDeg, 0.1452, 0.0},
      {0.329, 0.0, 0.0, -90.0 * kDeg},
      {0.3115, 0.0, 0.0, 0.0},
      {0.0, 90.0 * kDeg, -0.1222, 90.0 * kDeg},
      {0.0, 90.0 * kDeg, 0.106, 0.0},
      {0.0, 0.0, 0.1144, 0.0},
  };
  m.link_mass = {4.0, 7.5, 2.8, 1.2, 1.2, 0.5};
  m.link_com = {
      {0.0, 0.06, 0.0},  {-0.165, 0.0, 0.01}, {-0.15, 0.0, 0.0},
      {0.0, 0.03, 0.0},  {0.0, -0.03, 0.0},   {0.0, 0.0, -0.03},
  };
  m.link_inertia = {
      diag3(0.020, 0.010, 0.020), diag3(0.015, 0.070, 0.070), diag3(0.005, 0.025, 0.025),
      diag3(0.002, 0.0015, 0.002), diag3(0.002, 0.0015, 0.002), diag3(0.0005, 0.0005, 0.0004),
  };
  m.wrist_lump_mass = 1.2 + 1.2 + 0.5;
  m.joint_limits = {
      {-270.0 * kDeg, 270.0 * kDeg}, {-80.0 * kDeg, 80.0 * kDeg},   {-150.0 * kDeg, 150.0 * kDeg},
      {-180.0 * kDeg, 180.0 * kDeg}, {-180.0 * kDeg, 180.0 * kDeg}, {-270.0 * kDeg, 270.0 * kDeg},
  };
  m.gravity = Eigen::Vector3d(0.0, 0.0, -9.81);
  return m;
}

LossParams reference_loss() {
  LossParams p;
  p.b_m = (Eigen::VectorXd(6) << 0.6, 0.6, 0.3, 0.05, 0.05, 0.05).finished();
  p.c_m = (Eigen::VectorXd(6) << 3.0, 3.0, 1.5, 0.4, 0.4, 0.3).finished();
  p.f_c = (Eigen::VectorXd(6) << 3.0, 3.0, 2.0, 0.5, 0.5, 0.4).finished();
  return p;
}

RobotModel lumped_arm(const RobotModel& model) {
  require(model.n_joints() >= 3, "lumped_arm: model needs at least three joints");
  RobotModel m;
  m.dh.assign(model.dh.begin(), model.dh.begin() + 3);
  m.link_mass.assign(model.link_mass.begin(), model.link_mass.begin() + 3);
  m.link_com.assign(model.link_com.begin(), model.link_com.begin() + 3);
  m.link_inertia.assign(model.link_inertia.begin(), model.link_inertia.begin() + 3);
  m.joint_limits.assign(model.joint_limits.begin(), model.joint_limits.begin() + 3);
  m.gravity = model.gravity;

  // Fold the point mass into link 3 (parallel-axis theorem about the new COM).
  const double m3 = m.link_mass[2];
  const double mw = model.wrist_lump_mass;
  const Eigen::Vector3d c3 = m.link_com[2];
  const Eigen::Vector3d cw = Eigen::Vector3d::Zero();
  const double total = m3 + mw;
  if (total > 0.0) {
    const Eigen::Vector3d c = (m3 * c3 + mw * cw) / total;
    auto shift = [](double mass, const Eigen::Vector3d& r) {
      return mass * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
    };
    m.link_inertia[2] = m.link_inertia[2] + shift(m3, c3 - c) + shift(mw, cw - c);
    m.link_com[2] = c;
    m.link_mass[2] = total;
  }
  return m;
}

}  // namespace hdyn
