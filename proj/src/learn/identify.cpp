#include "hdyn/learn/identify.hpp"

#include <cmath>
#include <string>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/dynamics.hpp"

namespace hdyn {

LossParams identify_loss_params(const std::vector<TrajectoryLog>& logs, const RobotModel& model) {
  model.validate();
  const auto n = static_cast<Eigen::Index>(model.n_joints());
  Eigen::Index rows = 0;
  for (const auto& log : logs) {
    require(log.has_torques, "identify_loss_params: log carries no measured torques");
    require(log.n_joints() == n, "identify_loss_params: joint count mismatch");
    rows += log.n_samples();
  }
  require(rows >= 3, "identify_loss_params: need at least three samples");

  std::vector<Eigen::MatrixXd> regressors(static_cast<std::size_t>(n), Eigen::MatrixXd(rows, 3));
  std::vector<Eigen::VectorXd> targets(static_cast<std::size_t>(n), Eigen::VectorXd(rows));
  Eigen::Index r = 0;
  for (const auto& log : logs) {
    for (Eigen::Index k = 0; k < log.n_samples(); ++k, ++r) {
      const JointState s{log.theta.col(k), log.theta_dot.col(k), log.theta_ddot.col(k)};
      const Eigen::VectorXd residual = log.tau_measured.col(k) - inverse_dynamics(model, s);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = s.theta_dot[j];
        const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        regressors[static_cast<std::size_t>(j)].row(r) << s.theta_ddot[j], v, sgn;
        targets[static_cast<std::size_t>(j)][r] = residual[j];
      }
    }
  }

  LossParams out = LossParams::zeros(model.n_joints());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::MatrixXd& a = regressors[static_cast<std::size_t>(j)];
    // Scale columns so the rank test is unit-free.
    Eigen::Vector3d scale = a.colwise().norm().transpose();
    for (int c = 0; c < 3; ++c) {
      if (scale[c] == 0.0) scale[c] = 1.0;
    }
    const Eigen::MatrixXd scaled = a * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-9);
    if (qr.rank() < 3) {
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
      const Eigen::VectorXd sv = svd.singularValues();
      const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
      throw NumericalError("identify_loss_params: joint " + std::to_string(j + 1) +
                               " has rank-deficient regressors; the logs must move it in both directions",
                           cond);
    }
    const Eigen::Vector3d coeff = scale.cwiseInverse().asDiagonal() *
                                  Eigen::Vector3d(qr.solve(targets[static_cast<std::size_t>(j)]));
    out.b_m[j] = coeff[0];
    out.c_m[j] = std::max(0.0, coeff[1]);
    out.f_c[j] = std::max(0.0, coeff[2]);
  }
  return out;
}

}  // namespace hdyn
