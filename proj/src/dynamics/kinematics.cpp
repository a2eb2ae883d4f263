#include "hdyn/dynamics/kinematics.hpp"

#include <cmath>
#include <string>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

void check_dims(const RobotModel& model, const Eigen::VectorXd& theta) {
  require(theta.size() == static_cast<Eigen::Index>(model.n_joints()),
          "kinematics: theta has " + std::to_string(theta.size()) + " entries, model has " +
              std::to_string(model.n_joints()) + " joints");
}

}  // namespace

Eigen::Matrix4d dh_transform(const DhRow& row, double theta) {
  const double q = theta + row.theta_offset;
  const double cq = std::cos(q), sq = std::sin(q);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d T;
  T << cq, -sq * ca, sq * sa, row.a * cq,
       sq, cq * ca, -cq * sa, row.a * sq,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return T;
}

ChainFrames chain_frames(const RobotModel& model, const Eigen::VectorXd& theta) {
  check_dims(model, theta);
  const std::size_t n = model.n_joints();
  ChainFrames f;
  f.rotation.resize(n + 1);
  f.origin.resize(n + 1);
  f.rotation[0].setIdentity();
  f.origin[0].setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Matrix4d T = dh_transform(model.dh[i], theta[static_cast<Eigen::Index>(i)]);
    f.rotation[i + 1] = f.rotation[i] * T.topLeftCorner<3, 3>();
    f.origin[i + 1] = f.origin[i] + f.rotation[i] * T.topRightCorner<3, 1>();
  }
  return f;
}

Pose forward_kinematics(const RobotModel& model, const Eigen::VectorXd& theta) {
  const ChainFrames f = chain_frames(model, theta);
  return {f.rotation.back(), f.origin.back()};
}

Eigen::MatrixXd geometric_jacobian(const ChainFrames& frames) {
  const std::size_t n = frames.origin.size() - 1;
  Eigen::MatrixXd J(6, static_cast<Eigen::Index>(n));
  const Eigen::Vector3d& p_ee = frames.origin.back();
  for (std::size_t i = 1; i <= n; ++i) {
    const Eigen::Vector3d z = frames.joint_axis(i);
    const auto col = static_cast<Eigen::Index>(i - 1);
    J.block<3, 1>(0, col) = z.cross(p_ee - frames.origin[i - 1]);
    J.block<3, 1>(3, col) = z;
  }
  return J;
}

Eigen::MatrixXd geometric_jacobian(const RobotModel& model, const Eigen::VectorXd& theta) {
  return geometric_jacobian(chain_frames(model, theta));
}

}  // namespace hdyn
