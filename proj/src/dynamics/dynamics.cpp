#include "hdyn/dynamics/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

double sign0(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Eigen::VectorXd rnea(const RobotModel& model, const ChainFrames& frames,
                     const Eigen::VectorXd& theta_dot, const Eigen::VectorXd& theta_ddot,
                     const Eigen::Vector3d& gravity) {
  const std::size_t n = model.n_joints();
  // Forward pass in the base frame. Gravity enters as a base acceleration.
  std::vector<Eigen::Vector3d> force(n), moment(n), com(n);
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d alpha = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel = -gravity;  // acceleration of frame origin i-1
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d z = frames.rotation[i].col(2);
    const auto k = static_cast<Eigen::Index>(i);
    const Eigen::Vector3d omega_prev = omega;
    omega = omega_prev + z * theta_dot[k];
    alpha = alpha + z * theta_ddot[k] + omega_prev.cross(z * theta_dot[k]);
    const Eigen::Vector3d r = frames.origin[i + 1] - frames.origin[i];
    accel = accel + alpha.cross(r) + omega.cross(omega.cross(r));

    const Eigen::Matrix3d& R = frames.rotation[i + 1];
    const Eigen::Vector3d rc = R * model.link_com[i];
    com[i] = frames.origin[i + 1] + rc;
    const Eigen::Vector3d accel_c = accel + alpha.cross(rc) + omega.cross(omega.cross(rc));
    const Eigen::Matrix3d I = R * model.link_inertia[i] * R.transpose();
    force[i] = model.link_mass[i] * accel_c;
    moment[i] = I * alpha + omega.cross(I * omega);
  }

  // Backward pass: moments about each joint axis origin.
  Eigen::VectorXd tau(static_cast<Eigen::Index>(n));
  Eigen::Vector3d f_next = Eigen::Vector3d::Zero();
  Eigen::Vector3d n_next = Eigen::Vector3d::Zero();
  for (std::size_t i = n; i-- > 0;) {
    const Eigen::Vector3d& p_prev = frames.origin[i];
    const Eigen::Vector3d f = force[i] + f_next;
    const Eigen::Vector3d m = moment[i] + n_next + (com[i] - p_prev).cross(force[i]) +
                              (frames.origin[i + 1] - p_prev).cross(f_next);
    tau[static_cast<Eigen::Index>(i)] = m.dot(frames.rotation[i].col(2));
    f_next = f;
    n_next = m;
  }
  return tau;
}

Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& state) {
  validate_state(model, state);
  return rnea(model, chain_frames(model, state.theta), state.theta_dot, state.theta_ddot,
              model.gravity);
}

Eigen::MatrixXd mass_matrix(const RobotModel& model, const ChainFrames& frames) {
  const auto n = static_cast<Eigen::Index>(model.n_joints());
  Eigen::MatrixXd M(n, n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    unit.setZero();
    unit[i] = 1.0;
    M.col(i) = rnea(model, frames, zero, unit, Eigen::Vector3d::Zero());
  }
  // Symmetrise away round-off so downstream factorisations see an exact symmetric matrix.
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& theta) {
  return mass_matrix(model, chain_frames(model, theta));
}

Eigen::VectorXd gravity_torque(const RobotModel& model, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(theta.size());
  return rnea(model, chain_frames(model, theta), zero, zero, model.gravity);
}

Eigen::VectorXd bias_torque(const RobotModel& model, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& theta_dot) {
  return rnea(model, chain_frames(model, theta), theta_dot, Eigen::VectorXd::Zero(theta.size()),
              model.gravity);
}

Eigen::VectorXd loss_torque(const LossParams& params, const JointState& state) {
  require(params.size() == state.size(), "loss_torque: parameter/state dimension mismatch");
  const auto n = params.b_m.size();
  Eigen::VectorXd tau(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    tau[i] = params.b_m[i] * state.theta_ddot[i] + params.c_m[i] * state.theta_dot[i] +
             params.f_c[i] * sign0(state.theta_dot[i]);
  }
  return tau;
}

Eigen::VectorXd forward_dynamics(const RobotModel& model, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& theta_dot, const Eigen::VectorXd& tau,
                                 const LossParams* loss) {
  const auto n = static_cast<Eigen::Index>(model.n_joints());
  require(theta.size() == n && theta_dot.size() == n && tau.size() == n,
          "forward_dynamics: dimension mismatch");
  const ChainFrames frames = chain_frames(model, theta);
  Eigen::MatrixXd M = mass_matrix(model, frames);
  Eigen::VectorXd rhs = tau - rnea(model, frames, theta_dot, Eigen::VectorXd::Zero(n), model.gravity);
  if (loss != nullptr) {
    require(loss->size() == static_cast<std::size_t>(n), "forward_dynamics: loss dimension mismatch");
    M.diagonal() += loss->b_m;
    for (Eigen::Index i = 0; i < n; ++i) {
      rhs[i] -= loss->c_m[i] * theta_dot[i] + loss->f_c[i] * sign0(theta_dot[i]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    const double cond = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1]
                                               : std::numeric_limits<double>::infinity();
    std::ostringstream msg;
    msg << "forward_dynamics: effective mass matrix is not positive definite (condition number "
        << cond << ")";
    throw NumericalError(msg.str(), cond);
  }
  return llt.solve(rhs);
}

Energy mechanical_energy(const RobotModel& model, const Eigen::VectorXd& theta,
                         const Eigen::VectorXd& theta_dot) {
  const ChainFrames frames = chain_frames(model, theta);
  Energy e;
  e.kinetic = 0.5 * theta_dot.dot(mass_matrix(model, frames) * theta_dot);
  for (std::size_t i = 0; i < model.n_joints(); ++i) {
    const Eigen::Vector3d c = frames.origin[i + 1] + frames.rotation[i + 1] * model.link_com[i];
    e.potential -= model.link_mass[i] * model.gravity.dot(c);
  }
  return e;
}

}  // namespace hdyn
