#include "hdyn/sense/observer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hdyn/common/errors.hpp"

namespace hdyn {

void KalmanState::validate() const {
  require(p > 0.0 && q >= 0.0 && r > 0.0, "KalmanState: covariances must be positive");
  require(std::isfinite(tau_hat), "KalmanState: non-finite estimate");
}

KalmanState kalman_step(KalmanState s, double measurement) {
  const double p_prior = s.p + s.q;
  const double k = p_prior / (p_prior + s.r);
  s.tau_hat += k * (measurement - s.tau_hat);
  s.p = (1.0 - k) * p_prior;
  return s;
}

double kalman_steady_gain(double q, double r) {
  require(q >= 0.0 && r > 0.0, "kalman_steady_gain: need q >= 0 and r > 0");
  // Fixed point of p- = p + q with p = r p- / (p- + r).
  const double p_prior = 0.5 * (q + std::sqrt(q * q + 4.0 * q * r));
  return p_prior / (p_prior + r);
}

int kalman_settle_steps(double q, double r, double fraction) {
  require(fraction > 0.0 && fraction < 1.0, "kalman_settle_steps: fraction must be in (0, 1)");
  const double k = kalman_steady_gain(q, r);
  require(k > 0.0, "kalman_settle_steps: zero process noise never settles");
  if (k >= 1.0) return 1;
  return static_cast<int>(std::ceil(std::log(1.0 - fraction) / std::log(1.0 - k)));
}

Eigen::VectorXd external_torque_raw(const Eigen::VectorXd& tau_measured, const Eigen::VectorXd& tau_free) {
  require(tau_measured.size() == tau_free.size(), "external_torque_raw: size mismatch");
  return tau_free - tau_measured;
}

Eigen::MatrixXd external_torque_raw(const ModelSuite& free_model, const TrajectoryLog& log) {
  require(log.has_torques, "external_torque_raw: log carries no measured torques");
  return free_model.predict_log(log) - log.tau_measured;
}

void ObserverConfig::validate() const {
  require(q.size() == r.size() && q.size() > 0, "ObserverConfig: q and r need one entry per joint");
  require((q.array() >= 0.0).all() && (r.array() > 0.0).all(), "ObserverConfig: need q >= 0 and r > 0");
  require(p0 > 0.0, "ObserverConfig: p0 must be positive");
}

ObserverConfig calibrate_observer(const Eigen::MatrixXd& raw, double q_ratio) {
  require(q_ratio >= 0.0, "calibrate_observer: q ratio must be >= 0");
  ObserverConfig c;
  c.r.resize(raw.rows());
  for (Eigen::Index j = 0; j < raw.rows(); ++j) {
    double sum = 0.0;
    double sq = 0.0;
    int n = 0;
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      const double v = raw(j, k);
      if (!std::isfinite(v)) continue;
      sum += v;
      sq += v * v;
      ++n;
    }
    require(n >= 2, "calibrate_observer: need at least two finite samples per joint");
    const double mean = sum / n;
    c.r[j] = std::max(sq / n - mean * mean, 1e-12);
  }
  c.q = q_ratio * c.r;
  c.p0 = c.r.maxCoeff();
  return c;
}

Eigen::MatrixXd filter_external_torque(const Eigen::MatrixXd& raw, const ObserverConfig& config) {
  config.validate();
  require(config.q.size() == raw.rows(), "filter_external_torque: config size mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(raw.rows(), raw.cols(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < raw.rows(); ++j) {
    bool started = false;
    KalmanState s;
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      const double z = raw(j, k);
      if (!std::isfinite(z)) {
        require(!started, "filter_external_torque: gap in raw external torque");
        continue;
      }
      if (!started) {
        s = {z, config.p0, config.q[j], config.r[j]};
        started = true;
      } else {
        s = kalman_step(s, z);
      }
      out(j, k) = s.tau_hat;
    }
  }
  return out;
}

ObserverRun observe_log(const ModelSuite& free_model, const ObserverConfig& config, const TrajectoryLog& log) {
  ObserverRun run;
  run.times = log.times;
  run.raw = external_torque_raw(free_model, log);
  run.filtered = filter_external_torque(run.raw, config);
  return run;
}

StreamingObserver::StreamingObserver(ModelSuite free_model, ObserverConfig config)
    : model_(std::move(free_model)), config_(std::move(config)) {
  config_.validate();
}

bool StreamingObserver::push(double t, const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_dot,
                             const Eigen::VectorXd& theta_ddot, const Eigen::VectorXd& tau_measured) {
  const Eigen::Index n = theta.size();
  require(n == config_.q.size(), "StreamingObserver: joint count mismatch");
  Eigen::VectorXd row(1 + 4 * n);
  row << t, theta, theta_dot, theta_ddot, tau_measured;
  history_.push_back(std::move(row));
  const auto window = static_cast<std::size_t>(model_.max_window());
  while (history_.size() > window) history_.pop_front();
  if (history_.size() < window) return false;

  TrajectoryLog log = TrajectoryLog::allocate(n, static_cast<Eigen::Index>(window));
  for (std::size_t i = 0; i < window; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd& h = history_[i];
    log.times[k] = h[0];
    log.theta.col(k) = h.segment(1, n);
    log.theta_dot.col(k) = h.segment(1 + n, n);
    log.theta_ddot.col(k) = h.segment(1 + 2 * n, n);
    log.tau_measured.col(k) = h.segment(1 + 3 * n, n);
  }
  raw_ = external_torque_raw(model_, log).rightCols(1);
  if (!started_) {
    filters_.clear();
    for (Eigen::Index j = 0; j < n; ++j) filters_.push_back({raw_[j], config_.p0, config_.q[j], config_.r[j]});
    started_ = true;
  } else {
    for (Eigen::Index j = 0; j < n; ++j) filters_[static_cast<std::size_t>(j)] = kalman_step(filters_[static_cast<std::size_t>(j)], raw_[j]);
  }
  filtered_.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) filtered_[j] = filters_[static_cast<std::size_t>(j)].tau_hat;
  return true;
}

void write_observer_csv(const ObserverRun& run, const Eigen::MatrixXd* wrench3, std::ostream& out) {
  const Eigen::Index n = run.raw.rows();
  out << "t";
  for (Eigen::Index j = 1; j <= n; ++j) out << ",tauext_raw_" << j;
  for (Eigen::Index j = 1; j <= n; ++j) out << ",tauext_hat_" << j;
  if (wrench3) out << ",fz,mx,my";
  out << '\n';
  char buf[40];
  auto put = [&](double v) {
    if (std::isfinite(v)) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    } else {
      out << ',';
    }
  };
  for (Eigen::Index k = 0; k < run.raw.cols(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", run.times[k]);
    out << buf;
    for (Eigen::Index j = 0; j < n; ++j) put(run.raw(j, k));
    for (Eigen::Index j = 0; j < n; ++j) put(run.filtered(j, k));
    if (wrench3) {
      for (int a = 0; a < 3; ++a) put((*wrench3)(a, k));
    }
    out << '\n';
  }
}

}  // namespace hdyn
