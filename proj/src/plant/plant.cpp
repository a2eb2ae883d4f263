#include "hdyn/plant/plant.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/dynamics.hpp"
#include "hdyn/dynamics/kinematics.hpp"

namespace hdyn {

namespace {

double sign0(double x) { return (x > 0.0) - (x < 0.0); }

bool sized(const Eigen::VectorXd& v, std::size_t n) { return static_cast<std::size_t>(v.size()) == n; }

}  // namespace

ResidualSpec ResidualSpec::zeros(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  ResidualSpec s;
  s.stribeck_magnitude = Eigen::VectorXd::Zero(k);
  s.stribeck_velocity = Eigen::VectorXd::Ones(k);
  s.coulomb_asymmetry = Eigen::VectorXd::Zero(k);
  s.coulomb_reference = Eigen::VectorXd::Zero(k);
  s.ripple_amplitude = Eigen::VectorXd::Zero(k);
  s.ripple_harmonic = Eigen::VectorXd::Zero(k);
  return s;
}

void ResidualSpec::validate(std::size_t n) const {
  require(sized(stribeck_magnitude, n) && sized(stribeck_velocity, n) && sized(coulomb_asymmetry, n) &&
              sized(coulomb_reference, n) && sized(ripple_amplitude, n) && sized(ripple_harmonic, n),
          "residual spec: expected one entry per joint");
  require((stribeck_magnitude.array() >= 0).all() && (ripple_amplitude.array() >= 0).all() &&
              (coulomb_reference.array() >= 0).all() && load_dependent_loss_coeff >= 0.0,
          "residual spec: magnitudes must be >= 0");
  require((stribeck_velocity.array() > 0).all(), "residual spec: stribeck_velocity must be > 0");
  require((coulomb_asymmetry.array() >= 0).all() && (coulomb_asymmetry.array() < 1).all(),
          "residual spec: coulomb_asymmetry must lie in [0, 1)");
}

ResidualSpec reference_residual() {
  ResidualSpec s;
  s.stribeck_magnitude = (Eigen::VectorXd(6) << 2.5, 2.5, 1.5, 0.3, 0.3, 0.2).finished();
  s.stribeck_velocity = Eigen::VectorXd::Constant(6, 0.15);
  s.coulomb_asymmetry = (Eigen::VectorXd(6) << 0.35, 0.35, 0.35, 0.2, 0.2, 0.2).finished();
  s.coulomb_reference = reference_loss().f_c;
  s.ripple_amplitude = (Eigen::VectorXd(6) << 0.8, 0.8, 0.5, 0.08, 0.08, 0.05).finished();
  s.ripple_harmonic = Eigen::VectorXd::Constant(6, 4.0);
  s.load_dependent_loss_coeff = 0.03;
  return s;
}

Eigen::VectorXd residual_torque(const ResidualSpec& s, const JointState& state,
                                const Eigen::VectorXd& transmitted) {
  const Eigen::Index n = state.theta.size();
  require(transmitted.size() == n && s.stribeck_magnitude.size() == n,
          "residual_torque: dimension mismatch");
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = state.theta_dot[i];
    const double sv = sign0(v);
    const double ratio = v / s.stribeck_velocity[i];
    const double stribeck = s.stribeck_magnitude[i] * std::exp(-ratio * ratio) * sv;
    // Forward friction is (1 + a) f, reverse (1 - a) f: a velocity-gated offset of a f.
    const double asym = s.coulomb_asymmetry[i] * s.coulomb_reference[i] * std::abs(std::tanh(ratio));
    const double ripple = s.ripple_amplitude[i] * std::sin(s.ripple_harmonic[i] * state.theta[i]);
    const double load = s.load_dependent_loss_coeff * std::abs(transmitted[i]) * sv;
    r[i] = stribeck + asym + ripple + load;
  }
  return r;
}

Eigen::Matrix<double, 6, 1> WrenchProfile::at(double t) const {
  for (const auto& iv : schedule) {
    if (t >= iv.t_start && t < iv.t_end) return iv.wrench;
  }
  return Eigen::Matrix<double, 6, 1>::Zero();
}

void WrenchProfile::validate(double duration) const {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& a = schedule[i];
    require(a.t_start < a.t_end, "wrench profile: interval start must precede end");
    require(a.t_start >= 0.0 && a.t_end <= duration + 1e-9, "wrench profile: interval outside log duration");
    require(a.wrench.allFinite(), "wrench profile: wrench must be finite");
    for (std::size_t j = i + 1; j < schedule.size(); ++j) {
      const auto& b = schedule[j];
      require(a.t_end <= b.t_start || b.t_end <= a.t_start, "wrench profile: overlapping intervals");
    }
  }
}

void PlantConfig::validate() const {
  model.validate();
  const std::size_t n = model.n_joints();
  true_loss.validate(n);
  residual.validate(n);
  require(sample_period > 0.0, "plant: sample_period must be > 0");
  require(substeps >= 1, "plant: substeps must be >= 1");
  require(sized(torque_noise_std, n) && (torque_noise_std.array() >= 0).all(),
          "plant: torque_noise_std must have one non-negative entry per joint");
  require(sized(kp, n) && sized(kd, n), "plant: PD gains must have one entry per joint");
}

PlantConfig ideal_plant() {
  PlantConfig p;
  p.model = reference_robot();
  p.true_loss = reference_loss();
  p.residual = ResidualSpec::zeros(6);
  p.torque_noise_std = Eigen::VectorXd::Zero(6);
  p.kp = Eigen::VectorXd::Constant(6, 400.0);
  p.kd = Eigen::VectorXd::Constant(6, 40.0);
  return p;
}

PlantConfig reference_plant() {
  PlantConfig p = ideal_plant();
  p.residual = reference_residual();
  p.torque_noise_std = Eigen::VectorXd::Constant(6, 0.1);
  return p;
}

Eigen::VectorXd external_joint_torque(const RobotModel& model, const Eigen::VectorXd& theta,
                                      const Eigen::Matrix<double, 6, 1>& wrench_ee) {
  const ChainFrames frames = chain_frames(model, theta);
  const Eigen::Matrix3d& R = frames.rotation.back();
  Eigen::Matrix<double, 6, 1> w;
  w.head<3>() = R * wrench_ee.head<3>();
  w.tail<3>() = R * wrench_ee.tail<3>();
  return geometric_jacobian(frames).transpose() * w;
}

Eigen::VectorXd free_motion_step(const RobotModel& model, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = static_cast<Eigen::Index>(model.n_joints());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  auto f = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd d(2 * n);
    d.head(n) = s.tail(n);
    d.tail(n) = forward_dynamics(model, s.head(n), s.tail(n), zero, nullptr);
    return d;
  };
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Plant acceleration under a held motor torque.
Eigen::VectorXd plant_acceleration(const PlantConfig& p, const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                                   const Eigen::VectorXd& tau_motor,
                                   const Eigen::Matrix<double, 6, 1>& wrench, bool has_wrench) {
  const Eigen::Index n = q.size();
  JointState s{q, qd, Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd tau = tau_motor - residual_torque(p.residual, s, tau_motor);
  if (has_wrench) tau += external_joint_torque(p.model, q, wrench);
  return forward_dynamics(p.model, q, qd, tau, &p.true_loss);
}

}  // namespace

TrajectoryLog simulate_tracking(const PlantConfig& plant, const JointTrajectory& reference,
                                const WrenchProfile* wrench, std::uint64_t seed) {
  plant.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(plant.model.n_joints());
  const Eigen::Index N = reference.n_samples();
  require(reference.n_joints() == n, "simulate_tracking: reference joint count mismatch");
  require(N >= 1, "simulate_tracking: empty reference");
  require(std::abs(reference.sample_period - plant.sample_period) < 1e-12,
          "simulate_tracking: reference must be sampled at the plant sample period");
  if (wrench != nullptr) wrench->validate(reference.duration());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TrajectoryLog log = TrajectoryLog::allocate(n, N);
  Eigen::VectorXd q = reference.theta.col(0);
  Eigen::VectorXd qd = reference.theta_dot.col(0);
  const double dt = plant.sample_period;
  const double h = dt / plant.substeps;

  for (Eigen::Index k = 0; k < N; ++k) {
    const double t = dt * static_cast<double>(k);
    const Eigen::VectorXd err = reference.theta.col(k) - q;
    if (err.cwiseAbs().maxCoeff() > plant.divergence_limit) {
      Eigen::Index joint = 0;
      err.cwiseAbs().maxCoeff(&joint);
      std::ostringstream msg;
      msg << "tracking diverged at t=" << t << " s: joint " << joint + 1 << " error " << err[joint]
          << " rad exceeds " << plant.divergence_limit;
      throw TrackingDivergence(msg.str());
    }
    // Computed torque on the nominal model.
    JointState cmd{q, qd,
                   reference.theta_ddot.col(k) + plant.kp.cwiseProduct(err) +
                       plant.kd.cwiseProduct(reference.theta_dot.col(k) - qd)};
    const Eigen::VectorXd tau_cmd = inverse_dynamics(plant.model, cmd) + loss_torque(plant.true_loss, cmd);

    const Eigen::Matrix<double, 6, 1> w =
        wrench != nullptr ? wrench->at(t) : Eigen::Matrix<double, 6, 1>::Zero();
    const bool has_wrench = wrench != nullptr && !w.isZero(0.0);

    log.times[k] = t;
    log.theta.col(k) = q;
    log.theta_dot.col(k) = qd;
    log.theta_ddot.col(k) = plant_acceleration(plant, q, qd, tau_cmd, w, has_wrench);
    for (Eigen::Index i = 0; i < n; ++i) {
      log.tau_measured(i, k) = tau_cmd[i] + plant.torque_noise_std[i] * gauss(rng);
    }
    if (has_wrench) log.tau_external_true.col(k) = external_joint_torque(plant.model, q, w);
    log.wrench_true.col(k) = w;

    if (k + 1 == N) break;
    // Zero-order hold on the command and the wrench across the sample.
    auto deriv = [&](const Eigen::VectorXd& qs, const Eigen::VectorXd& qds) {
      return plant_acceleration(plant, qs, qds, tau_cmd, w, has_wrench);
    };
    for (int s = 0; s < plant.substeps; ++s) {
      const Eigen::VectorXd a1 = deriv(q, qd);
      const Eigen::VectorXd q2 = q + 0.5 * h * qd, qd2 = qd + 0.5 * h * a1;
      const Eigen::VectorXd a2 = deriv(q2, qd2);
      const Eigen::VectorXd q3 = q + 0.5 * h * qd2, qd3 = qd + 0.5 * h * a2;
      const Eigen::VectorXd a3 = deriv(q3, qd3);
      const Eigen::VectorXd q4 = q + h * qd3, qd4 = qd + h * a3;
      const Eigen::VectorXd a4 = deriv(q4, qd4);
      q += h / 6.0 * (qd + 2.0 * qd2 + 2.0 * qd3 + qd4);
      qd += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    }
  }
  return log;
}

}  // namespace hdyn
