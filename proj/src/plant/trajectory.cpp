#include "hdyn/plant/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdyn/common/errors.hpp"

namespace hdyn {

void JointTrajectory::append(const JointTrajectory& other) {
  require(other.n_samples() > 0, "append: empty trajectory");
  if (n_samples() == 0) {
    *this = other;
    return;
  }
  require(other.n_joints() == n_joints(), "append: joint count mismatch");
  require(std::abs(other.sample_period - sample_period) < 1e-15, "append: sample period mismatch");
  const bool joined = (theta.col(n_samples() - 1) - other.theta.col(0)).cwiseAbs().maxCoeff() < 1e-12;
  const Eigen::Index skip = joined ? 1 : 0;
  const Eigen::Index add = other.n_samples() - skip;
  const Eigen::Index old = n_samples();
  auto grow = [&](Eigen::MatrixXd& dst, const Eigen::MatrixXd& src) {
    dst.conservativeResize(Eigen::NoChange, old + add);
    dst.rightCols(add) = src.rightCols(add);
  };
  grow(theta, other.theta);
  grow(theta_dot, other.theta_dot);
  grow(theta_ddot, other.theta_ddot);
}

JointTrajectory JointTrajectory::stationary(const Eigen::VectorXd& q, Eigen::Index samples,
                                            double sample_period) {
  JointTrajectory t;
  t.sample_period = sample_period;
  t.theta = q.replicate(1, samples);
  t.theta_dot = Eigen::MatrixXd::Zero(q.size(), samples);
  t.theta_ddot = Eigen::MatrixXd::Zero(q.size(), samples);
  return t;
}

TrajectoryLog TrajectoryLog::allocate(Eigen::Index n, Eigen::Index N) {
  TrajectoryLog log;
  log.times = Eigen::VectorXd::Zero(N);
  log.theta = Eigen::MatrixXd::Zero(n, N);
  log.theta_dot = Eigen::MatrixXd::Zero(n, N);
  log.theta_ddot = Eigen::MatrixXd::Zero(n, N);
  log.tau_measured = Eigen::MatrixXd::Zero(n, N);
  log.tau_external_true = Eigen::MatrixXd::Zero(n, N);
  log.wrench_true = Eigen::MatrixXd::Zero(6, N);
  return log;
}

TrajectoryLog TrajectoryLog::from_reference(const JointTrajectory& ref, double t0) {
  TrajectoryLog log = allocate(ref.n_joints(), ref.n_samples());
  for (Eigen::Index k = 0; k < ref.n_samples(); ++k) {
    log.times[k] = t0 + ref.sample_period * static_cast<double>(k);
  }
  log.theta = ref.theta;
  log.theta_dot = ref.theta_dot;
  log.theta_ddot = ref.theta_ddot;
  log.has_torques = false;
  return log;
}

TrajectoryLog TrajectoryLog::slice(Eigen::Index begin, Eigen::Index end) const {
  require(0 <= begin && begin <= end && end <= n_samples(), "slice: range out of bounds");
  const Eigen::Index len = end - begin;
  TrajectoryLog out;
  out.times = times.segment(begin, len);
  out.theta = theta.middleCols(begin, len);
  out.theta_dot = theta_dot.middleCols(begin, len);
  out.theta_ddot = theta_ddot.middleCols(begin, len);
  out.tau_measured = tau_measured.middleCols(begin, len);
  out.tau_external_true = tau_external_true.middleCols(begin, len);
  out.wrench_true = wrench_true.middleCols(begin, len);
  out.has_torques = has_torques;
  return out;
}

void TrajectoryLog::validate() const {
  const Eigen::Index N = n_samples();
  const Eigen::Index n = n_joints();
  require(theta.cols() == N && theta_dot.cols() == N && theta_ddot.cols() == N &&
              tau_measured.cols() == N && tau_external_true.cols() == N && wrench_true.cols() == N,
          "trajectory log: series lengths differ");
  require(theta_dot.rows() == n && theta_ddot.rows() == n && tau_measured.rows() == n &&
              tau_external_true.rows() == n && wrench_true.rows() == 6,
          "trajectory log: series widths differ");
  if (N < 2) return;
  const double dt = times[1] - times[0];
  require(dt > 0.0, "trajectory log: times must be strictly increasing");
  for (Eigen::Index k = 1; k < N; ++k) {
    const double step = times[k] - times[k - 1];
    // Absolute times accumulate rounding of order ulp(t); compare against that scale.
    const double tol = 1e-12 + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(times[k]);
    require(std::abs(step - dt) <= tol, "trajectory log: non-uniform time step at sample " +
                                             std::to_string(k));
  }
}

namespace {

void put(std::string& line, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.append(buf, static_cast<std::size_t>(len));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse(const std::string& s, std::size_t line_no) {
  if (s.empty()) return 0.0;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("log csv line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  }
  return v;
}

}  // namespace

void write_log_csv(const TrajectoryLog& log, std::ostream& out) {
  const Eigen::Index n = log.n_joints();
  std::string header = "t";
  for (const char* prefix : {"theta_", "thetad_", "thetadd_", "tau_", "tauext_"}) {
    for (Eigen::Index i = 1; i <= n; ++i) header += "," + std::string(prefix) + std::to_string(i);
  }
  header += ",fx,fy,fz,mx,my,mz\n";
  out << header;
  std::string line;
  for (Eigen::Index k = 0; k < log.n_samples(); ++k) {
    line.clear();
    put(line, log.times[k]);
    for (const Eigen::MatrixXd* m : {&log.theta, &log.theta_dot, &log.theta_ddot}) {
      for (Eigen::Index i = 0; i < n; ++i) {
        line += ',';
        put(line, (*m)(i, k));
      }
    }
    for (const Eigen::MatrixXd* m : {&log.tau_measured, &log.tau_external_true}) {
      for (Eigen::Index i = 0; i < n; ++i) {
        line += ',';
        if (log.has_torques) put(line, (*m)(i, k));
      }
    }
    for (Eigen::Index i = 0; i < 6; ++i) {
      line += ',';
      if (log.has_torques) put(line, log.wrench_true(i, k));
    }
    line += '\n';
    out << line;
  }
}

void write_log_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write log '" + path + "'");
  write_log_csv(log, out);
}

TrajectoryLog read_log_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("log csv: missing header");
  const auto header = split(line);
  if (header.empty() || header[0] != "t" || (header.size() - 7) % 5 != 0) {
    throw ConfigError("log csv: unexpected header");
  }
  const auto n = static_cast<Eigen::Index>((header.size() - 7) / 5);
  if (header[1] != "theta_1" || header.back() != "mz") throw ConfigError("log csv: unexpected header");

  std::vector<std::vector<double>> rows;
  bool any_torque = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ConfigError("log csv line " + std::to_string(line_no) + ": wrong column count");
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = parse(cells[c], line_no);
      if (c >= static_cast<std::size_t>(1 + 3 * n) && !cells[c].empty()) any_torque = true;
    }
    rows.push_back(std::move(row));
  }
  const auto N = static_cast<Eigen::Index>(rows.size());
  TrajectoryLog log = TrajectoryLog::allocate(n, N);
  log.has_torques = any_torque || N == 0;
  for (Eigen::Index k = 0; k < N; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    log.times[k] = r[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      log.theta(i, k) = r[static_cast<std::size_t>(1 + i)];
      log.theta_dot(i, k) = r[static_cast<std::size_t>(1 + n + i)];
      log.theta_ddot(i, k) = r[static_cast<std::size_t>(1 + 2 * n + i)];
      log.tau_measured(i, k) = r[static_cast<std::size_t>(1 + 3 * n + i)];
      log.tau_external_true(i, k) = r[static_cast<std::size_t>(1 + 4 * n + i)];
    }
    for (Eigen::Index i = 0; i < 6; ++i) log.wrench_true(i, k) = r[static_cast<std::size_t>(1 + 5 * n + i)];
  }
  log.validate();
  return log;
}

TrajectoryLog read_log_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open log '" + path + "'");
  return read_log_csv(in);
}

void estimate_acceleration(TrajectoryLog& log, double cutoff_hz) {
  const Eigen::Index N = log.n_samples();
  if (N < 3) return;
  const double dt = log.sample_period();
  const double rc = 1.0 / (2.0 * M_PI * cutoff_hz);
  const double alpha = dt / (rc + dt);
  Eigen::MatrixXd raw(log.n_joints(), N);
  raw.col(0) = (log.theta_dot.col(1) - log.theta_dot.col(0)) / dt;
  raw.col(N - 1) = (log.theta_dot.col(N - 1) - log.theta_dot.col(N - 2)) / dt;
  for (Eigen::Index k = 1; k + 1 < N; ++k) {
    raw.col(k) = (log.theta_dot.col(k + 1) - log.theta_dot.col(k - 1)) / (2.0 * dt);
  }
  log.theta_ddot.col(0) = raw.col(0);
  for (Eigen::Index k = 1; k < N; ++k) {
    log.theta_ddot.col(k) = log.theta_ddot.col(k - 1) + alpha * (raw.col(k) - log.theta_ddot.col(k - 1));
  }
}

}  // namespace hdyn
