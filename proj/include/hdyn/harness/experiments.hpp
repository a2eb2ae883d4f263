#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hdyn/learn/hybrid.hpp"
#include "hdyn/learn/metrics.hpp"
#include "hdyn/plan/speed_planner.hpp"
#include "hdyn/plant/plant.hpp"
#include "hdyn/sense/observer.hpp"
#include "hdyn/sense/virtual_sensor.hpp"
#include "hdyn/task/peg_hole.hpp"
#include "hdyn/task/wipe.hpp"
#include "hdyn/traj/trajgen.hpp"

namespace hdyn {

/// Reads `robot.file`; empty means the bundled reference arm.
RobotModel robot_from_config(const nlohmann::json& config);
/// Reference plant on `robot`, with `plant.residual` and `plant.noise_std` applied.
PlantConfig plant_from_config(const nlohmann::json& config, const RobotModel& robot);

struct DataGenConfig {
  double range_fraction = 0.5;
  std::vector<int> segments{2, 2, 2, 1, 1, 1};
  std::vector<double> speeds{0.6, 1.0};
  std::size_t keep = 7;
  PairMode mode = PairMode::Ordered;
  std::uint64_t seed = 1;
  bool noise_free = false;

  static DataGenConfig from_json(const nlohmann::json& data_section);
};

struct GeneratedData {
  TrajectorySet set;
  std::vector<TrajectoryLog> logs;  // one per leg

  Eigen::Index samples() const;
};

/// Collision-free grid configurations, chained into legs, each leg tracked
/// on the plant from rest. Leg k uses plant seed `seed * 1000003 + k`.
GeneratedData generate_data(const RobotModel& robot, PlantConfig plant, const DataGenConfig& cfg);

HybridTrainOptions train_options_from_json(const nlohmann::json& train_section);
std::vector<ChannelGroup> groups_from_json(const nlohmann::json& names);

/// RMSE over every joint and every sample with a full window.
double suite_rmse(const ModelSuite& suite, const TrajectoryLog& log);
ModelStats evaluate_suite(const std::string& name, const ModelSuite& suite, const std::vector<TrajectoryLog>& logs);

struct WrenchStudyConfig {
  double spread_scale = 0.5;
  double wrench_hold = 1.0;
  int poses = 12;
  int train_campaigns = 30;
  int free_campaigns = 4;
  int free_poses = 20;
  int window_len = 5;
  double q_ratio = 0.01;
  std::uint64_t seed = 100;
  GbtHyperParams tree_params{
      .learning_rate = 0.1, .max_depth = 6, .min_child_weight = 20.0, .colsample_bytree = 0.6, .n_estimators = 150};
  HybridTrainOptions free_options{
      .window_len = 5,
      .normalize = false,
      .params = {.learning_rate = 0.1, .max_depth = 6, .colsample_bytree = 0.6, .n_estimators = 150}};

  static WrenchStudyConfig from_json(const nlohmann::json& wrench_section);
};

struct WrenchStudy {
  ModelSuite free_model;
  ObserverConfig observer;
  VirtualWrenchModel windowed;
  VirtualWrenchModel instantaneous;
  ObservedLog held_out;
  Eigen::Vector3d mae_windowed;       // F_Z N, M_X N m, M_Y N m
  Eigen::Vector3d mae_instantaneous;
  Eigen::Vector3d mae_analytic;
  double fz_range = 0.0;              // N, applied F_Z max - min on the held-out campaign
};

/// Free-motion H1 model from zero-wrench campaigns, observer calibrated on
/// one more, wrench maps with the configured window and with window 1 on
/// the training campaigns, scored on one held-out campaign.
WrenchStudy run_wrench_study(const PlantConfig& plant, const WrenchStudyConfig& cfg);

struct PegBatch {
  std::vector<PegEpisodeResult> episodes;
  int successes = 0;
  double success_rate() const;
};

PegEpisodeConfig peg_config_from_json(const nlohmann::json& peg_section);
PegBatch run_peg_batch(const PegEpisodeConfig& cfg, int episodes, std::uint64_t first_seed, bool keep_records);

WipeConfig wipe_config_from_json(const nlohmann::json& wipe_section);

/// Plan input: {"names": [...], "trajectories": [...], "reward": {...}}.
SpeedBenchmark benchmark_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SpeedBenchmark& b);

struct PlanRow {
  std::string name;
  PlanResult result;
  Eigen::VectorXd plant_peak_before;  // N m, noise-free reference plant
  Eigen::VectorXd plant_peak_after;
};

/// Optimises every benchmark trajectory with the given model; also tracks the
/// baseline and the plan on a noise-free plant for reference.
std::vector<PlanRow> run_plan_benchmark(const ModelSuite& model, const SpeedBenchmark& b, const PlannerOptions& opts,
                                        const PlantConfig& truth_plant);
std::string format_plan_table(const std::vector<PlanRow>& rows);

}  // namespace hdyn
