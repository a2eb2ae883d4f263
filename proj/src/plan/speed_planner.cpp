#include "hdyn/plan/speed_planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

long steps_of(double duration, double dt) { return std::lround(duration / dt); }

}  // namespace

void ViaTrajectory::validate() const {
  require(start.size() > 0 && via.size() == start.size() && end.size() == start.size(),
          "ViaTrajectory: waypoints must share a joint count");
  require(sample_period > 0.0, "ViaTrajectory: sample period must be positive");
  for (double d : durations) {
    require(d > 0.0, "ViaTrajectory: durations must be positive");
    const long n = steps_of(d, sample_period);
    require(n >= 2 && std::abs(static_cast<double>(n) * sample_period - d) < 1e-9,
            "ViaTrajectory: durations must be whole multiples of the sample period (at least 2)");
  }
}

JointTrajectory ViaTrajectory::sample() const {
  validate();
  JointTrajectory out = sample_quintic(start, via, durations[0], sample_period);
  out.append(sample_quintic(via, end, durations[1], sample_period));
  return out;
}

ViaTrajectory ViaTrajectory::with_durations(const std::array<double, 2>& d) const {
  ViaTrajectory t = *this;
  t.durations = d;
  return t;
}

nlohmann::json to_json(const ViaTrajectory& t) {
  return {{"start", to_std(t.start)},
          {"via", to_std(t.via)},
          {"end", to_std(t.end)},
          {"durations", {t.durations[0], t.durations[1]}},
          {"sample_period", t.sample_period}};
}

ViaTrajectory via_trajectory_from_json(const nlohmann::json& j) {
  ViaTrajectory t;
  t.start = vec_from_json(j.at("start"));
  t.via = vec_from_json(j.at("via"));
  t.end = vec_from_json(j.at("end"));
  const auto d = j.at("durations").get<std::vector<double>>();
  require(d.size() == 2, "ViaTrajectory: need exactly two segment durations");
  t.durations = {d[0], d[1]};
  t.sample_period = j.value("sample_period", 0.008);
  t.validate();
  return t;
}

void RewardConfig::validate() const {
  require(a < 0.0, "RewardConfig: a must be negative");
  require(b > 100.0, "RewardConfig: b must exceed 100");
  require(tau_limit.size() > 0 && (tau_limit.array() > 0.0).all(), "RewardConfig: torque limits must be positive");
}

nlohmann::json to_json(const RewardConfig& c) { return {{"a", c.a}, {"b", c.b}, {"tau_limit", to_std(c.tau_limit)}}; }

RewardConfig reward_config_from_json(const nlohmann::json& j) {
  RewardConfig c;
  c.a = j.at("a").get<double>();
  c.b = j.at("b").get<double>();
  c.tau_limit = vec_from_json(j.at("tau_limit"));
  c.validate();
  return c;
}

bool within_limits(const Eigen::VectorXd& peak, const Eigen::VectorXd& limit) {
  require(peak.size() == limit.size(), "within_limits: size mismatch");
  return (peak.array() <= limit.array()).all();
}

double reward(const Eigen::VectorXd& peak, double elapsed, double baseline_elapsed, const RewardConfig& cfg) {
  cfg.validate();
  require(peak.size() == cfg.tau_limit.size(), "reward: peak torque needs one entry per limit");
  double violation = 0.0;
  bool violated = false;
  for (Eigen::Index j = 0; j < peak.size(); ++j) {
    if (peak[j] > cfg.tau_limit[j]) {
      violated = true;
      violation += std::abs(cfg.tau_limit[j] - peak[j]);
    }
  }
  return violated ? cfg.a * violation : cfg.b * (baseline_elapsed - elapsed);
}

Eigen::VectorXd peak_torque(const ModelSuite& model, const JointTrajectory& traj) {
  require(traj.n_samples() >= 1, "peak_torque: empty trajectory");
  const Eigen::Index pad = model.max_window() - 1;
  JointTrajectory padded = JointTrajectory::stationary(traj.theta.col(0), pad + 1, traj.sample_period);
  padded.append(traj);
  const Eigen::MatrixXd tau = model.predict_log(TrajectoryLog::from_reference(padded));
  const Eigen::MatrixXd used = tau.rightCols(tau.cols() - pad);
  require(used.allFinite(), "peak_torque: model produced non-finite torques");
  return used.cwiseAbs().rowwise().maxCoeff();
}

Eigen::VectorXd peak_torque(const ModelSuite& model, const ViaTrajectory& traj) {
  return peak_torque(model, traj.sample());
}

std::array<double, 2> duration_floor(const ViaTrajectory& traj, const MotionLimits& limits) {
  const double dt = traj.sample_period;
  const auto snap = [dt](double t) { return std::max(2.0, std::ceil(t / dt - 1e-9)) * dt; };
  return {snap(quintic_min_duration(traj.via - traj.start, limits)),
          snap(quintic_min_duration(traj.end - traj.via, limits))};
}

void PlannerOptions::validate(std::size_t n_joints) const {
  require(budget >= 1 && population >= 2 && elites >= 1 && elites <= population,
          "PlannerOptions: need budget >= 1 and 1 <= elites <= population");
  require(initial_std > 0.0 && min_std > 0.0, "PlannerOptions: spreads must be positive");
  require(smoothing > 0.0 && smoothing <= 1.0, "PlannerOptions: smoothing must be in (0, 1]");
  require(static_cast<std::size_t>(limits.v_max.size()) == n_joints &&
              static_cast<std::size_t>(limits.a_max.size()) == n_joints,
          "PlannerOptions: motion limits need one entry per joint");
}

PlanResult optimize_speed(const ModelSuite& model, const ViaTrajectory& baseline, const RewardConfig& cfg,
                          const PlannerOptions& options) {
  baseline.validate();
  cfg.validate();
  options.validate(static_cast<std::size_t>(baseline.start.size()));
  require(cfg.tau_limit.size() == baseline.start.size(), "optimize_speed: torque limits need one entry per joint");

  PlanResult result;
  result.baseline = baseline;
  result.plan = baseline;
  result.elapsed_before = baseline.elapsed();
  result.peak_before = peak_torque(model, baseline);
  require(within_limits(result.peak_before, cfg.tau_limit), "optimize_speed: baseline violates the torque limits");
  result.elapsed_after = result.elapsed_before;
  result.peak_after = result.peak_before;

  const double dt = baseline.sample_period;
  const std::array<double, 2> floor = duration_floor(baseline, options.limits);
  std::array<double, 2> lo{}, hi{};
  for (int s = 0; s < 2; ++s) {
    hi[s] = 1.0;
    lo[s] = std::min(1.0, floor[s] / baseline.durations[s]);
  }

  // Durations live on the sample grid; identical candidates are evaluated once.
  std::map<std::pair<long, long>, std::pair<double, Eigen::VectorXd>> cache;
  double best = 0.0;  // the baseline itself: no violation, no reduction
  const auto evaluate = [&](const std::array<double, 2>& alpha) {
    std::array<double, 2> d{};
    for (int s = 0; s < 2; ++s) {
      d[s] = std::max(floor[s], std::min(baseline.durations[s], std::ceil(alpha[s] * baseline.durations[s] / dt - 1e-9) * dt));
    }
    const std::pair<long, long> key{steps_of(d[0], dt), steps_of(d[1], dt)};
    auto it = cache.find(key);
    if (it == cache.end()) {
      const ViaTrajectory cand = baseline.with_durations(d);
      const Eigen::VectorXd peak = peak_torque(model, cand);
      it = cache.emplace(key, std::make_pair(reward(peak, cand.elapsed(), result.elapsed_before, cfg), peak)).first;
      ++result.evaluations;
      const bool feasible = within_limits(peak, cfg.tau_limit);
      if (feasible && it->second.first > best) {
        best = it->second.first;
        result.plan = cand;
        result.peak_after = peak;
        result.elapsed_after = cand.elapsed();
      }
      result.reward_trace.push_back(best);
    }
    return it->second.first;
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::array<double, 2> mean{1.0, 1.0};
  std::array<double, 2> spread{options.initial_std, options.initial_std};
  int stale = 0;
  while (result.evaluations < options.budget && stale < 20) {
    const int before = result.evaluations;
    std::vector<std::pair<double, std::array<double, 2>>> scored;
    for (int p = 0; p < options.population; ++p) {
      std::array<double, 2> alpha{};
      for (int s = 0; s < 2; ++s) alpha[s] = std::clamp(mean[s] + spread[s] * unit(rng), lo[s], hi[s]);
      scored.emplace_back(evaluate(alpha), alpha);
      if (result.evaluations >= options.budget) break;
    }
    stale = result.evaluations == before ? stale + 1 : 0;
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    const int k = std::min<int>(options.elites, static_cast<int>(scored.size()));
    for (int s = 0; s < 2; ++s) {
      double m = 0.0, v = 0.0;
      for (int e = 0; e < k; ++e) m += scored[static_cast<std::size_t>(e)].second[s] / k;
      for (int e = 0; e < k; ++e) {
        const double dev = scored[static_cast<std::size_t>(e)].second[s] - m;
        v += dev * dev / k;
      }
      mean[s] = (1.0 - options.smoothing) * mean[s] + options.smoothing * m;
      spread[s] = std::max(options.min_std, (1.0 - options.smoothing) * spread[s] + options.smoothing * std::sqrt(v));
    }
  }

  // Post-hoc check of the returned plan against a fresh evaluation.
  const Eigen::VectorXd recheck = peak_torque(model, result.plan);
  if (!within_limits(recheck, cfg.tau_limit)) {
    result.plan = baseline;
    result.peak_after = result.peak_before;
    result.elapsed_after = result.elapsed_before;
  }
  result.success = result.elapsed_after < result.elapsed_before;
  return result;
}

nlohmann::json to_json(const PlanResult& r) {
  return {{"success", r.success},
          {"elapsed_before", r.elapsed_before},
          {"elapsed_after", r.elapsed_after},
          {"reduction_fraction", r.reduction_fraction()},
          {"durations_before", {r.baseline.durations[0], r.baseline.durations[1]}},
          {"durations_after", {r.plan.durations[0], r.plan.durations[1]}},
          {"peak_before", to_std(r.peak_before)},
          {"peak_after", to_std(r.peak_after)},
          {"evaluations", r.evaluations},
          {"reward_trace", r.reward_trace}};
}

}  // namespace hdyn

namespace hdyn {

SpeedBenchmark reference_speed_benchmark() {
  const auto v = [](std::initializer_list<double> x) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
    Eigen::Index i = 0;
    for (double e : x) out[i++] = e;
    return out;
  };
  SpeedBenchmark b;
  const auto add = [&](std::string name, Eigen::VectorXd s, Eigen::VectorXd m, Eigen::VectorXd e, int n0, int n1) {
    ViaTrajectory t;
    t.start = std::move(s);
    t.via = std::move(m);
    t.end = std::move(e);
    t.durations = {n0 * t.sample_period, n1 * t.sample_period};
    b.names.push_back(std::move(name));
    b.trajectories.push_back(std::move(t));
  };
  add("reach", v({0.0, -0.3, 0.6, 0.0, 0.3, 0.0}), v({0.15, -0.15, 0.4, 0.2, 0.5, 0.3}),
      v({0.3, -0.3, 0.6, 0.4, 0.3, 0.6}), 96, 97);
  add("lift", v({-0.2, -0.1, 0.3, 0.0, 0.0, 0.0}), v({-0.1, -0.25, 0.5, -0.2, 0.2, 0.0}),
      v({0.0, -0.1, 0.3, -0.4, 0.4, 0.0}), 82, 82);
  add("sweep", v({0.4, -0.2, 0.5, 0.3, 0.2, -0.3}), v({0.2, -0.35, 0.65, 0.0, 0.4, 0.0}),
      v({0.0, -0.2, 0.5, -0.3, 0.2, 0.3}), 102, 103);
  b.reward.tau_limit = v({9.0, 14.5, 9.5, 2.5, 1.5, 1.2});
  return b;
}

}  // namespace hdyn
