#include "hdyn/traj/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <string>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

// Peak |s'| and |s''| of the normalised quintic 10t^3 - 15t^4 + 6t^5.
constexpr double kPeakVelocity = 1.875;
const double kPeakAcceleration = 10.0 / std::sqrt(3.0);

}  // namespace

void GridSpec::validate(const std::vector<JointLimit>& ranges) const {
  require(per_joint_angles.size() == ranges.size(), "GridSpec: one angle list per joint");
  require(!speeds.empty(), "GridSpec: no speeds");
  for (double s : speeds) require(s > 0.0 && std::isfinite(s), "GridSpec: speeds must be positive");
  for (std::size_t j = 0; j < ranges.size(); ++j) {
    const auto& angles = per_joint_angles[j];
    require(!angles.empty(), "GridSpec: empty angle list for joint " + std::to_string(j + 1));
    for (std::size_t k = 0; k < angles.size(); ++k) {
      require(angles[k] >= ranges[j].min - 1e-12 && angles[k] <= ranges[j].max + 1e-12,
              "GridSpec: angle outside range for joint " + std::to_string(j + 1));
      if (k > 0) require(angles[k] > angles[k - 1], "GridSpec: angles must be strictly increasing");
    }
  }
}

GridSpec make_grid(const std::vector<JointLimit>& ranges, const std::vector<int>& segments,
                   std::vector<double> speeds) {
  require(segments.size() == ranges.size(), "make_grid: one segment count per joint");
  GridSpec grid;
  grid.speeds = std::move(speeds);
  for (std::size_t j = 0; j < ranges.size(); ++j) {
    require(segments[j] >= 0, "make_grid: negative segment count");
    require(ranges[j].max >= ranges[j].min, "make_grid: inverted range");
    std::vector<double> angles;
    if (segments[j] == 0 || ranges[j].max == ranges[j].min) {
      angles.push_back(0.5 * (ranges[j].min + ranges[j].max));
    } else {
      const double step = (ranges[j].max - ranges[j].min) / segments[j];
      for (int k = 0; k <= segments[j]; ++k) angles.push_back(ranges[j].min + k * step);
      angles.back() = ranges[j].max;
    }
    grid.per_joint_angles.push_back(std::move(angles));
  }
  grid.validate(ranges);
  return grid;
}

std::vector<Eigen::VectorXd> digitize(const GridSpec& grid, std::size_t cap) {
  const std::size_t n = grid.per_joint_angles.size();
  require(n > 0, "digitize: no joints");
  std::size_t total = 1;
  for (const auto& angles : grid.per_joint_angles) {
    require(!angles.empty(), "digitize: empty angle list");
    require(total <= cap / angles.size(),
            "digitize: grid exceeds the cap of " + std::to_string(cap) + " configurations");
    total *= angles.size();
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(total);
  std::vector<std::size_t> index(n, 0);
  for (std::size_t c = 0; c < total; ++c) {
    Eigen::VectorXd q(n);
    for (std::size_t j = 0; j < n; ++j) q[j] = grid.per_joint_angles[j][index[j]];
    out.push_back(std::move(q));
    // Last joint varies fastest.
    for (std::size_t j = n; j-- > 0;) {
      if (++index[j] < grid.per_joint_angles[j].size()) break;
      index[j] = 0;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> digitize(const std::vector<JointLimit>& ranges, int segments_per_joint,
                                      std::size_t cap) {
  std::vector<int> segments(ranges.size(), segments_per_joint);
  return digitize(make_grid(ranges, segments, {1.0}), cap);
}

MotionLimits reference_motion_limits() {
  MotionLimits limits;
  limits.v_max = (Eigen::VectorXd(6) << 1.5, 1.5, 1.8, 2.5, 2.5, 3.0).finished();
  limits.a_max = (Eigen::VectorXd(6) << 4.0, 4.0, 5.0, 8.0, 8.0, 10.0).finished();
  return limits;
}

namespace {

void check_limits(const MotionLimits& limits, Eigen::Index n) {
  require(limits.v_max.size() == n && limits.a_max.size() == n, "MotionLimits: size mismatch");
  require(limits.v_max.minCoeff() > 0.0 && limits.a_max.minCoeff() > 0.0,
          "MotionLimits: limits must be positive");
  require(limits.sample_period > 0.0, "MotionLimits: sample period must be positive");
}

}  // namespace

double quintic_min_duration(const Eigen::VectorXd& delta, const MotionLimits& limits) {
  check_limits(limits, delta.size());
  double t = 0.0;
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    const double d = std::abs(delta[j]);
    t = std::max({t, kPeakVelocity * d / limits.v_max[j],
                  std::sqrt(kPeakAcceleration * d / limits.a_max[j])});
  }
  return t;
}

JointTrajectory sample_quintic(const Eigen::VectorXd& start, const Eigen::VectorXd& end,
                               double duration, double sample_period) {
  require(start.size() == end.size(), "sample_quintic: size mismatch");
  require(duration > 0.0 && sample_period > 0.0, "sample_quintic: non-positive duration");
  const auto steps = static_cast<Eigen::Index>(std::llround(duration / sample_period));
  require(steps >= 1 && std::abs(steps * sample_period - duration) < 1e-9 * std::max(1.0, duration),
          "sample_quintic: duration must be a whole number of sample periods");
  const Eigen::VectorXd delta = end - start;
  JointTrajectory traj;
  traj.sample_period = sample_period;
  traj.theta.resize(start.size(), steps + 1);
  traj.theta_dot.resize(start.size(), steps + 1);
  traj.theta_ddot.resize(start.size(), steps + 1);
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(steps);
    const double s2 = s * s;
    const double pos = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
    const double vel = 30.0 * s2 * (1.0 - 2.0 * s + s2) / duration;
    const double acc = 60.0 * s * (1.0 - 3.0 * s + 2.0 * s2) / (duration * duration);
    traj.theta.col(k) = k == steps ? end : Eigen::VectorXd(start + pos * delta);
    traj.theta_dot.col(k) = vel * delta;
    traj.theta_ddot.col(k) = acc * delta;
  }
  return traj;
}

JointTrajectory time_parameterize(const Eigen::VectorXd& start, const Eigen::VectorXd& end,
                                  double speed, const MotionLimits& limits) {
  require(start.size() == end.size(), "time_parameterize: size mismatch");
  check_limits(limits, start.size());
  require(speed > 0.0 && std::isfinite(speed), "time_parameterize: speed must be positive");
  const Eigen::VectorXd delta = end - start;
  require(delta.cwiseAbs().maxCoeff() >= limits.min_displacement,
          "time_parameterize: start and end coincide");
  double duration = 0.0;
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    duration = std::max(duration, std::abs(delta[j]) / (speed * limits.v_max[j]));
  }
  duration = std::max(duration, quintic_min_duration(delta, limits));
  const double dt = limits.sample_period;
  const double steps = std::ceil(duration / dt - 1e-9);
  require(steps >= 2.0, "time_parameterize: leg shorter than two samples");
  return sample_quintic(start, end, steps * dt, dt);
}

std::size_t TrajectorySet::pair_legs() const {
  return static_cast<std::size_t>(
      std::count_if(legs.begin(), legs.end(), [](const Leg& l) { return !l.transfer; }));
}

namespace {

// Euler circuit of the complete digraph on m nodes, starting and ending at 0.
// Successors are tried in ascending order, so the result is deterministic.
std::vector<std::size_t> complete_digraph_circuit(std::size_t m) {
  std::vector<std::size_t> next(m, 0);
  auto advance = [&](std::size_t v) {
    if (next[v] == v) ++next[v];
    return next[v];
  };
  std::vector<std::size_t> stack{0};
  std::vector<std::size_t> circuit;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    const std::size_t w = advance(v);
    if (w < m) {
      ++next[v];
      stack.push_back(w);
    } else {
      circuit.push_back(v);
      stack.pop_back();
    }
  }
  std::reverse(circuit.begin(), circuit.end());
  return circuit;
}

// Covers every unordered pair once, inserting transfer legs where the walk gets stuck.
void unordered_walk(std::size_t m, double speed, std::size_t& current, std::vector<Leg>& legs) {
  std::vector<std::vector<bool>> used(m, std::vector<bool>(m, false));
  std::size_t remaining = m * (m - 1) / 2;
  while (remaining > 0) {
    std::size_t target = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != current && !used[current][j]) {
        target = j;
        break;
      }
    }
    if (target == m) {
      std::size_t a = m;
      std::size_t b = m;
      for (std::size_t i = 0; i < m && a == m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          if (!used[i][j]) {
            a = i;
            b = j;
            break;
          }
        }
      }
      legs.push_back({current, a, speed, true});
      current = a;
      target = b;
    }
    legs.push_back({current, target, speed, false});
    used[current][target] = used[target][current] = true;
    current = target;
    --remaining;
  }
}

}  // namespace

TrajectorySet enumerate_legs(const std::vector<Eigen::VectorXd>& configs,
                             const std::vector<double>& speeds, PairMode mode) {
  require(configs.size() >= 2, "enumerate_legs: need at least two configurations");
  require(!speeds.empty(), "enumerate_legs: no speeds");
  for (double s : speeds) require(s > 0.0, "enumerate_legs: speeds must be positive");
  const std::size_t m = configs.size();
  for (const auto& q : configs) require(q.size() == configs[0].size(), "enumerate_legs: size mismatch");

  TrajectorySet set;
  set.configs = configs;
  if (mode == PairMode::Ordered) {
    const std::vector<std::size_t> circuit = complete_digraph_circuit(m);
    set.legs.reserve(speeds.size() * m * (m - 1));
    for (double speed : speeds) {
      for (std::size_t k = 0; k + 1 < circuit.size(); ++k) {
        set.legs.push_back({circuit[k], circuit[k + 1], speed, false});
      }
    }
  } else {
    std::size_t current = 0;
    for (double speed : speeds) unordered_walk(m, speed, current, set.legs);
  }
  return set;
}

JointTrajectory sample_set(const TrajectorySet& set, const MotionLimits& limits) {
  require(!set.legs.empty(), "sample_set: no legs");
  JointTrajectory out;
  out.sample_period = limits.sample_period;
  for (std::size_t k = 0; k < set.legs.size(); ++k) {
    const Leg& leg = set.legs[k];
    require(leg.from < set.configs.size() && leg.to < set.configs.size(),
            "sample_set: leg index out of range");
    if (k > 0) require(set.legs[k - 1].to == leg.from, "sample_set: legs are not chained");
    out.append(time_parameterize(set.configs[leg.from], set.configs[leg.to], leg.speed, limits));
  }
  return out;
}

std::vector<Eigen::VectorXd> select_configurations(const RobotModel& model, const GridSpec& grid,
                                                   const LinkBoxes& boxes,
                                                   const std::vector<Obb>& obstacles,
                                                   std::size_t keep, std::uint64_t seed,
                                                   std::size_t cap) {
  grid.validate(model.joint_limits);
  std::vector<Eigen::VectorXd> free;
  for (auto& q : digitize(grid, cap)) {
    if (collision_free(model, q, boxes, obstacles)) free.push_back(std::move(q));
  }
  if (keep == 0 || free.size() <= keep) return free;
  std::vector<Eigen::VectorXd> picked;
  picked.reserve(keep);
  std::mt19937_64 rng(seed);
  std::sample(free.begin(), free.end(), std::back_inserter(picked), keep, rng);
  return picked;
}

}  // namespace hdyn
