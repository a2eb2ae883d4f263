#include "hdyn/sense/virtual_sensor.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/kinematics.hpp"

namespace hdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kHalfPi = 1.57079632679489661923;

}  // namespace

JacobianWrench wrench_from_jacobian(const RobotModel& model, const Eigen::VectorXd& theta,
                                    const Eigen::VectorXd& tau_ext, double max_condition) {
  require(tau_ext.size() == static_cast<Eigen::Index>(model.n_joints()),
          "wrench_from_jacobian: one external torque per joint expected");
  const Eigen::MatrixXd jt = geometric_jacobian(model, theta).transpose();  // n x 6
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  const double cond = smallest > 0.0 ? sv[0] / smallest : std::numeric_limits<double>::infinity();
  if (sv.size() < 6 || !(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "wrench_from_jacobian: Jacobian is rank deficient (condition " << cond
        << "); unobservable wrench direction [" << svd.matrixV().col(sv.size() - 1).transpose() << "]";
    throw NumericalError(msg.str(), cond);
  }
  return {svd.solve(tau_ext), cond};
}

Vector6d rotate_wrench(const Vector6d& w, const Eigen::Matrix3d& r) {
  Vector6d out;
  out.head<3>() = r.transpose() * w.head<3>();
  out.tail<3>() = r.transpose() * w.tail<3>();
  return out;
}

Wrench three_axis(const Vector6d& w) { return {w[2], w[3], w[4]}; }

Eigen::MatrixXd analytic_wrench(const RobotModel& model, const TrajectoryLog& log, const Eigen::MatrixXd& tau_ext) {
  require(tau_ext.cols() == log.n_samples(), "analytic_wrench: column count mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(3, log.n_samples(), kNaN);
  for (Eigen::Index k = 0; k < log.n_samples(); ++k) {
    if (!tau_ext.col(k).allFinite()) continue;
    try {
      const Eigen::VectorXd q = log.theta.col(k);
      const JacobianWrench jw = wrench_from_jacobian(model, q, tau_ext.col(k));
      const Wrench w = three_axis(rotate_wrench(jw.wrench, forward_kinematics(model, q).rotation));
      out.col(k) << w.f_z, w.m_x, w.m_y;
    } catch (const NumericalError&) {
      // Singular pose: no estimate for this sample.
    }
  }
  return out;
}

std::vector<int> axis_torque_channels(WrenchAxis axis) {
  switch (axis) {
    case WrenchAxis::FZ: return {0, 1, 2};
    case WrenchAxis::MX: return {4};
    case WrenchAxis::MY: return {3};
  }
  return {};
}

Eigen::MatrixXd wrench_features(const TrajectoryLog& log, const Eigen::MatrixXd& tau_ext, WrenchAxis axis,
                                int window_len, std::vector<Eigen::Index>* sample_index) {
  require(window_len >= 1, "wrench_features: window length must be >= 1");
  require(log.n_joints() >= 6, "wrench_features: logs must carry six joints");
  require(tau_ext.cols() == log.n_samples() && tau_ext.rows() >= 6, "wrench_features: external torque shape mismatch");
  const std::vector<int> channels = axis_torque_channels(axis);
  const Eigen::Index per_stamp = 6 + static_cast<Eigen::Index>(channels.size());
  std::vector<Eigen::Index> rows;
  for (Eigen::Index k = window_len - 1; k < log.n_samples(); ++k) {
    bool ok = true;
    for (Eigen::Index s = k - window_len + 1; s <= k && ok; ++s) {
      for (int c : channels) ok = ok && std::isfinite(tau_ext(c, s));
    }
    if (ok) rows.push_back(k);
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(
      static_cast<Eigen::Index>(rows.size()), per_stamp * window_len);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* out = x.row(static_cast<Eigen::Index>(i)).data();
    for (Eigen::Index s = rows[i] - window_len + 1; s <= rows[i]; ++s) {
      for (int j = 0; j < 6; ++j) *out++ = log.theta(j, s);
      for (int c : channels) *out++ = tau_ext(c, s);
    }
  }
  if (sample_index) *sample_index = std::move(rows);
  return x;
}

namespace {

int label_row(WrenchAxis axis) {
  switch (axis) {
    case WrenchAxis::FZ: return 2;
    case WrenchAxis::MX: return 3;
    case WrenchAxis::MY: return 4;
  }
  return 0;
}

constexpr WrenchAxis kAxes[] = {WrenchAxis::FZ, WrenchAxis::MX, WrenchAxis::MY};

}  // namespace

VirtualWrenchModel train_wrench_maps(const std::vector<ObservedLog>& data, int window_len,
                                     const GbtHyperParams& params) {
  require(!data.empty(), "train_wrench_maps: no data");
  VirtualWrenchModel model;
  model.window_len = window_len;
  for (WrenchAxis axis : kAxes) {
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::VectorXd> labels;
    Eigen::Index rows = 0;
    for (const auto& d : data) {
      std::vector<Eigen::Index> idx;
      blocks.push_back(wrench_features(d.log, d.tau_ext, axis, window_len, &idx));
      Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) y[static_cast<Eigen::Index>(i)] = d.log.wrench_true(label_row(axis), idx[i]);
      labels.push_back(std::move(y));
      rows += blocks.back().rows();
    }
    Eigen::MatrixXd x(rows, blocks[0].cols());
    Eigen::VectorXd y(rows);
    Eigen::Index r = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      x.middleRows(r, blocks[b].rows()) = blocks[b];
      y.segment(r, labels[b].size()) = labels[b];
      r += blocks[b].rows();
    }
    model.maps[static_cast<std::size_t>(axis)] = train_gbt(x, y, params);
  }
  return model;
}

Eigen::MatrixXd predict_wrench(const VirtualWrenchModel& model, const ObservedLog& data) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(3, data.log.n_samples(), kNaN);
  for (WrenchAxis axis : kAxes) {
    std::vector<Eigen::Index> idx;
    const Eigen::MatrixXd x = wrench_features(data.log, data.tau_ext, axis, model.window_len, &idx);
    if (idx.empty()) continue;
    const Eigen::VectorXd y = model.maps[static_cast<std::size_t>(axis)].predict(x);
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(axis), idx[i]) = y[static_cast<Eigen::Index>(i)];
  }
  return out;
}

nlohmann::json to_json(const VirtualWrenchModel& model) {
  return {{"format_version", 1},
          {"window_len", model.window_len},
          {"fz", to_json(model.maps[0])},
          {"mx", to_json(model.maps[1])},
          {"my", to_json(model.maps[2])}};
}

VirtualWrenchModel wrench_model_from_json(const nlohmann::json& j) {
  try {
    VirtualWrenchModel m;
    m.window_len = j.at("window_len").get<int>();
    m.maps[0] = ensemble_from_json(j.at("fz"));
    m.maps[1] = ensemble_from_json(j.at("mx"));
    m.maps[2] = ensemble_from_json(j.at("my"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("wrench model: ") + e.what());
  }
}

Eigen::Vector3d wrench_mae(const Eigen::MatrixXd& predicted, const TrajectoryLog& log) {
  require(predicted.rows() == 3 && predicted.cols() == log.n_samples(), "wrench_mae: shape mismatch");
  Eigen::Vector3d out;
  for (int a = 0; a < 3; ++a) {
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index k = 0; k < log.n_samples(); ++k) {
      if (!std::isfinite(predicted(a, k))) continue;
      sum += std::abs(predicted(a, k) - log.wrench_true(2 + a, k));
      ++n;
    }
    require(n > 0, "wrench_mae: no finite predictions");
    out[a] = sum / n;
  }
  return out;
}

void CampaignSpec::validate(std::size_t n) const {
  require(center.size() == static_cast<Eigen::Index>(n) && spread.size() == center.size(),
          "CampaignSpec: center and spread need one entry per joint");
  require((spread.array() >= 0.0).all(), "CampaignSpec: spread must be >= 0");
  require(poses >= 1 && dwell >= 0.0 && speed > 0.0 && wrench_hold > 0.0, "CampaignSpec: invalid timing");
  require(fz_max >= 0.0 && moment_max >= 0.0, "CampaignSpec: wrench bounds must be >= 0");
}

CampaignSpec reference_campaign() {
  CampaignSpec s;
  // Tool pointing straight down in front of the base: theta2 + theta3 + theta4 = pi/2.
  s.center = (Eigen::VectorXd(6) << 0.0, 0.1, 1.5, kHalfPi - 1.6, kHalfPi, 0.0).finished();
  s.spread = (Eigen::VectorXd(6) << 0.4, 0.25, 0.3, 0.3, 0.3, 0.5).finished();
  return s;
}

WrenchCampaign make_wrench_campaign(const CampaignSpec& spec, const MotionLimits& limits, std::uint64_t seed) {
  spec.validate(static_cast<std::size_t>(spec.center.size()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dt = limits.sample_period;
  const auto dwell_samples = static_cast<Eigen::Index>(std::llround(spec.dwell / dt)) + 1;

  WrenchCampaign c;
  c.reference = JointTrajectory::stationary(spec.center, dwell_samples, dt);
  Eigen::VectorXd current = spec.center;
  for (int p = 0; p < spec.poses; ++p) {
    Eigen::VectorXd next = spec.center;
    for (Eigen::Index j = 0; j < next.size(); ++j) next[j] += spec.spread[j] * unit(rng);
    if ((next - current).cwiseAbs().maxCoeff() >= limits.min_displacement) {
      c.reference.append(time_parameterize(current, next, spec.speed, limits));
    }
    c.reference.append(JointTrajectory::stationary(next, dwell_samples, dt));
    current = next;
  }
  if (spec.zero_wrench) return c;
  std::uniform_real_distribution<double> force(0.0, spec.fz_max);
  const double duration = c.reference.duration();
  for (double t = 0.0; t < duration; t += spec.wrench_hold) {
    WrenchInterval w;
    w.t_start = t;
    w.t_end = std::min(t + spec.wrench_hold, duration);
    w.wrench << 0.0, 0.0, force(rng), spec.moment_max * unit(rng), spec.moment_max * unit(rng), 0.0;
    c.wrench.schedule.push_back(w);
  }
  return c;
}

}  // namespace hdyn
