#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"
#include "hdyn/learn/features.hpp"
#include "hdyn/learn/gbt.hpp"
#include "hdyn/plant/trajectory.hpp"

namespace hdyn {

/// Which terms a torque model sums.
///
///   P1  equations of motion
///   P2  equations of motion + joint loss
///   D   trees only
///   H1  equations of motion + joint loss + trees
///   H2  equations of motion + trees
///   H3  joint loss + trees
enum class Composition { P1, P2, D, H1, H2, H3 };

struct CompositionParts {
  bool eom = false;
  bool loss = false;
  bool trees = false;
};

CompositionParts parts(Composition c);
std::string to_string(Composition c);
Composition composition_from_string(const std::string& name);

struct HybridModel {
  Composition composition = Composition::P1;
  ChannelGroup group = ChannelGroup::Joints123;
  int window_len = 1;  // samples read per prediction; 1 for physics-only models
  std::optional<RobotModel> physics;
  std::optional<LossParams> loss;
  std::vector<GbtEnsemble> trees;  // one per channel of the group
  Normalization normalization;     // applied to tree features

  /// Throws ContractError when the assets do not match the composition.
  void validate() const;
};

/// Equations-of-motion and loss terms the composition includes, channels x N.
Eigen::MatrixXd physics_part(const HybridModel& model, const TrajectoryLog& log);

/// Tree output, channels x N. Columns before the first full window are NaN.
Eigen::MatrixXd tree_part(const HybridModel& model, const TrajectoryLog& log);

/// Predicted torques for the group's channels, channels x N. Columns before
/// the first full window are NaN.
Eigen::MatrixXd predict_log(const HybridModel& model, const TrajectoryLog& log);

/// Prediction at one sample index (k >= window_len - 1).
Eigen::VectorXd predict_torque(const HybridModel& model, const TrajectoryLog& log, Eigen::Index k);

struct HybridTrainOptions {
  int window_len = 10;
  bool normalize = false;
  GbtHyperParams params;
};

/// Fits the trees to tau_measured minus whatever physics terms the composition
/// includes. Physics-only compositions just store their assets.
HybridModel train_hybrid(Composition composition, ChannelGroup group,
                         const std::vector<TrajectoryLog>& logs, const std::optional<RobotModel>& physics,
                         const std::optional<LossParams>& loss, const HybridTrainOptions& options);

constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const HybridModel& model);
HybridModel hybrid_from_json(const nlohmann::json& j);
void save_model(const HybridModel& model, const std::string& path);
HybridModel load_model(const std::string& path);

/// Set of group models that together predict every joint. Joints no member
/// covers fall back to equations of motion plus loss when a fallback robot is set.
struct ModelSuite {
  std::vector<HybridModel> members;
  std::optional<RobotModel> fallback_robot;
  std::optional<LossParams> fallback_loss;

  int max_window() const;
  /// n x N predicted joint torques; columns before the first full window are NaN.
  Eigen::MatrixXd predict_log(const TrajectoryLog& log) const;
};

/// Trains one member per group; joints outside the groups use the physics fallback.
ModelSuite train_suite(Composition composition, const std::vector<ChannelGroup>& groups,
                       const std::vector<TrajectoryLog>& logs, const RobotModel& robot,
                       const LossParams& loss, const HybridTrainOptions& options);

nlohmann::json to_json(const ModelSuite& suite);
ModelSuite suite_from_json(const nlohmann::json& j);

}  // namespace hdyn
