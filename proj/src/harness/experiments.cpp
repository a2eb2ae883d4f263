#include "hdyn/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/robot_config.hpp"
#include "hdyn/harness/config.hpp"
#include "hdyn/learn/identify.hpp"
#include "hdyn/traj/obb.hpp"

namespace hdyn {

using nlohmann::json;

RobotModel robot_from_config(const json& config) {
  const std::string file = config_at(config, "robot.file").get<std::string>();
  return file.empty() ? reference_robot() : load_robot(file);
}

PlantConfig plant_from_config(const json& config, const RobotModel& robot) {
  PlantConfig p = reference_plant();
  require(robot.n_joints() == p.model.n_joints(), "plant: the bundled loss and residual are for six joints");
  p.model = robot;
  if (!config_at(config, "plant.residual").get<bool>()) p.residual = ResidualSpec::zeros(p.residual.stribeck_magnitude.size());
  p.torque_noise_std.setConstant(config_at(config, "plant.noise_std").get<double>());
  p.validate();
  return p;
}

DataGenConfig DataGenConfig::from_json(const json& d) {
  DataGenConfig c;
  c.range_fraction = d.at("range_fraction").get<double>();
  c.segments = d.at("segments").get<std::vector<int>>();
  c.speeds = d.at("speeds").get<std::vector<double>>();
  c.keep = d.at("keep").get<std::size_t>();
  const std::string mode = d.at("pair_mode").get<std::string>();
  if (mode != "ordered" && mode != "unordered") throw ConfigError("data.pair_mode must be ordered or unordered");
  c.mode = mode == "ordered" ? PairMode::Ordered : PairMode::Unordered;
  c.seed = d.at("seed").get<std::uint64_t>();
  c.noise_free = d.at("noise_free").get<bool>();
  return c;
}

Eigen::Index GeneratedData::samples() const {
  Eigen::Index n = 0;
  for (const auto& l : logs) n += l.n_samples();
  return n;
}

GeneratedData generate_data(const RobotModel& robot, PlantConfig plant, const DataGenConfig& cfg) {
  require(cfg.range_fraction > 0.0 && cfg.range_fraction <= 1.0, "data: range_fraction must be in (0, 1]");
  require(cfg.segments.size() == robot.joint_limits.size(), "data: need one segment count per joint");
  if (cfg.noise_free) plant.torque_noise_std.setZero();
  std::vector<JointLimit> ranges;
  for (const auto& l : robot.joint_limits) {
    const double mid = 0.5 * (l.min + l.max), half = 0.5 * (l.max - l.min) * cfg.range_fraction;
    ranges.push_back({mid - half, mid + half});
  }
  const GridSpec grid = make_grid(ranges, cfg.segments, cfg.speeds);
  const std::vector<Eigen::VectorXd> configs =
      select_configurations(robot, grid, reference_link_boxes(robot), {floor_box()}, cfg.keep, cfg.seed);
  require(configs.size() >= 2, "data: fewer than two collision-free configurations survived");

  GeneratedData out;
  out.set = enumerate_legs(configs, cfg.speeds, cfg.mode);
  const MotionLimits limits = reference_motion_limits();
  for (std::size_t k = 0; k < out.set.legs.size(); ++k) {
    const Leg& leg = out.set.legs[k];
    const JointTrajectory ref = time_parameterize(out.set.configs[leg.from], out.set.configs[leg.to], leg.speed, limits);
    out.logs.push_back(simulate_tracking(plant, ref, nullptr, cfg.seed * 1000003ULL + k));
  }
  return out;
}

HybridTrainOptions train_options_from_json(const json& t) {
  HybridTrainOptions o;
  o.window_len = t.at("window_len").get<int>();
  o.normalize = t.at("normalize").get<bool>();
  o.params = hyperparams_from_json(t.at("gbt"));
  o.params.validate();
  require(o.window_len >= 1, "train.window_len must be >= 1");
  return o;
}

std::vector<ChannelGroup> groups_from_json(const json& names) {
  std::vector<ChannelGroup> g;
  for (const auto& n : names) g.push_back(group_from_string(n.get<std::string>()));
  return g;
}

double suite_rmse(const ModelSuite& suite, const TrajectoryLog& log) {
  const Eigen::Index skip = suite.max_window() - 1;
  require(log.n_samples() > skip, "suite_rmse: log shorter than the model window");
  const Eigen::MatrixXd pred = suite.predict_log(log);
  const Eigen::MatrixXd err = pred.rightCols(log.n_samples() - skip) - log.tau_measured.rightCols(log.n_samples() - skip);
  return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
}

ModelStats evaluate_suite(const std::string& name, const ModelSuite& suite, const std::vector<TrajectoryLog>& logs) {
  std::vector<double> v;
  for (const auto& l : logs) v.push_back(suite_rmse(suite, l));
  return summarize(name, v);
}

WrenchStudyConfig WrenchStudyConfig::from_json(const json& w) {
  WrenchStudyConfig c;
  c.spread_scale = w.at("spread_scale").get<double>();
  c.wrench_hold = w.at("wrench_hold").get<double>();
  c.poses = w.at("poses").get<int>();
  c.train_campaigns = w.at("train_campaigns").get<int>();
  c.free_campaigns = w.at("free_campaigns").get<int>();
  c.free_poses = w.at("free_poses").get<int>();
  c.window_len = w.at("window_len").get<int>();
  c.q_ratio = w.at("q_ratio").get<double>();
  c.seed = w.at("seed").get<std::uint64_t>();
  c.tree_params = hyperparams_from_json(w.at("gbt"));
  c.tree_params.validate();
  return c;
}

WrenchStudy run_wrench_study(const PlantConfig& plant, const WrenchStudyConfig& cfg) {
  require(cfg.train_campaigns >= 1 && cfg.free_campaigns >= 1, "wrench: need at least one campaign of each kind");
  const MotionLimits limits = reference_motion_limits();
  CampaignSpec spec = reference_campaign();
  spec.spread *= cfg.spread_scale;
  spec.wrench_hold = cfg.wrench_hold;
  spec.poses = cfg.poses;

  // Free-motion model near the working pose.
  std::vector<TrajectoryLog> free;
  for (int s = 0; s < cfg.free_campaigns; ++s) {
    CampaignSpec z = spec;
    z.zero_wrench = true;
    z.poses = cfg.free_poses;
    const WrenchCampaign c = make_wrench_campaign(z, limits, cfg.seed + static_cast<std::uint64_t>(s));
    free.push_back(simulate_tracking(plant, c.reference, nullptr, cfg.seed * 7 + static_cast<std::uint64_t>(s)));
  }
  WrenchStudy out;
  const LossParams loss = identify_loss_params(free, plant.model);
  out.free_model = train_suite(Composition::H1,
                               {ChannelGroup::Joints123, ChannelGroup::Joint4, ChannelGroup::Joint5, ChannelGroup::Joint6},
                               free, plant.model, loss, cfg.free_options);

  // Observer noise from one more zero-wrench run.
  CampaignSpec z = spec;
  z.zero_wrench = true;
  const WrenchCampaign zc = make_wrench_campaign(z, limits, cfg.seed + 899);
  const TrajectoryLog zlog = simulate_tracking(plant, zc.reference, nullptr, cfg.seed + 9);
  out.observer = calibrate_observer(external_torque_raw(out.free_model, zlog), cfg.q_ratio);

  const auto observed = [&](std::uint64_t campaign_seed, std::uint64_t sim_seed) {
    const WrenchCampaign c = make_wrench_campaign(spec, limits, campaign_seed);
    const TrajectoryLog log = simulate_tracking(plant, c.reference, &c.wrench, sim_seed);
    return ObservedLog{log, observe_log(out.free_model, out.observer, log).filtered};
  };
  std::vector<ObservedLog> train;
  for (int s = 0; s < cfg.train_campaigns; ++s) {
    train.push_back(observed(cfg.seed + 100 + static_cast<std::uint64_t>(s), cfg.seed + 50 + static_cast<std::uint64_t>(s)));
  }
  // The held-out campaign does not depend on how many training campaigns run.
  out.held_out = observed(cfg.seed + 99, cfg.seed + 49);
  out.windowed = train_wrench_maps(train, cfg.window_len, cfg.tree_params);
  out.instantaneous = train_wrench_maps(train, 1, cfg.tree_params);
  const TrajectoryLog& hl = out.held_out.log;
  out.mae_windowed = wrench_mae(predict_wrench(out.windowed, out.held_out), hl);
  out.mae_instantaneous = wrench_mae(predict_wrench(out.instantaneous, out.held_out), hl);
  out.mae_analytic = wrench_mae(analytic_wrench(plant.model, hl, out.held_out.tau_ext), hl);
  out.fz_range = hl.wrench_true.row(2).maxCoeff() - hl.wrench_true.row(2).minCoeff();
  return out;
}

double PegBatch::success_rate() const {
  return episodes.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(episodes.size());
}

PegEpisodeConfig peg_config_from_json(const json& p) {
  PegEpisodeConfig c = reference_peg_episode();
  c.max_steps = p.at("max_steps").get<int>();
  c.scene.max_offset = p.at("max_offset").get<double>();
  c.scene.max_tilt = p.at("max_tilt_deg").get<double>() * std::numbers::pi / 180.0;
  c.validate();
  return c;
}

PegBatch run_peg_batch(const PegEpisodeConfig& cfg, int episodes, std::uint64_t first_seed, bool keep_records) {
  require(episodes >= 1, "peg: need at least one episode");
  PegBatch b;
  for (int e = 0; e < episodes; ++e) {
    b.episodes.push_back(run_peg_episode(cfg, first_seed + static_cast<std::uint64_t>(e), keep_records));
    if (b.episodes.back().success) ++b.successes;
  }
  return b;
}

WipeConfig wipe_config_from_json(const json& w) {
  WipeConfig c = reference_wipe();
  c.target_fz = w.at("target_fz").get<double>();
  c.gain = w.at("gain").get<double>();
  c.steps = w.at("steps").get<int>();
  c.surface.ramp_height = w.at("ramp_height").get<double>();
  c.validate();
  return c;
}

SpeedBenchmark benchmark_from_json(const json& j) {
  SpeedBenchmark b;
  for (const auto& t : j.at("trajectories")) b.trajectories.push_back(via_trajectory_from_json(t));
  if (j.contains("names")) {
    b.names = j.at("names").get<std::vector<std::string>>();
  } else {
    for (std::size_t i = 0; i < b.trajectories.size(); ++i) b.names.push_back("trajectory_" + std::to_string(i + 1));
  }
  require(b.names.size() == b.trajectories.size() && !b.trajectories.empty(),
          "plan input: need one name per trajectory and at least one trajectory");
  b.reward = reward_config_from_json(j.at("reward"));
  return b;
}

json to_json(const SpeedBenchmark& b) {
  json t = json::array();
  for (const auto& x : b.trajectories) t.push_back(to_json(x));
  return {{"names", b.names}, {"trajectories", t}, {"reward", to_json(b.reward)}};
}

std::vector<PlanRow> run_plan_benchmark(const ModelSuite& model, const SpeedBenchmark& b, const PlannerOptions& opts,
                                        const PlantConfig& truth_plant) {
  std::vector<PlanRow> rows;
  const auto plant_peak = [&](const ViaTrajectory& t) -> Eigen::VectorXd {
    return simulate_tracking(truth_plant, t.sample(), nullptr, 0).tau_measured.cwiseAbs().rowwise().maxCoeff();
  };
  for (std::size_t i = 0; i < b.trajectories.size(); ++i) {
    PlanRow r;
    r.name = b.names[i];
    r.result = optimize_speed(model, b.trajectories[i], b.reward, opts);
    r.plant_peak_before = plant_peak(r.result.baseline);
    r.plant_peak_after = plant_peak(r.result.plan);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_plan_table(const std::vector<PlanRow>& rows) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << std::left << std::setw(12) << "trajectory" << std::right << std::setw(12) << "original" << std::setw(12)
      << "optimized" << std::setw(14) << "improvement%" << "\n";
  double mean = 0.0;
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r.name << std::right << std::setw(12) << r.result.elapsed_before
        << std::setw(12) << r.result.elapsed_after << std::setw(14) << std::setprecision(1)
        << 100.0 * r.result.reduction_fraction() << std::setprecision(3) << "\n";
    mean += r.result.reduction_fraction() / static_cast<double>(rows.size());
  }
  out << std::left << std::setw(12) << "mean" << std::right << std::setw(38) << std::setprecision(1) << 100.0 * mean
      << "\n";
  return out.str();
}

}  // namespace hdyn
