#include "hdyn/learn/hybrid.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/dynamics.hpp"
#include "hdyn/dynamics/robot_config.hpp"

namespace hdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Full-joint EOM and/or loss torque, n x N.
Eigen::MatrixXd full_physics(const RobotModel* robot, const LossParams* loss, const TrajectoryLog& log) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(log.n_joints(), log.n_samples());
  for (Eigen::Index k = 0; k < log.n_samples(); ++k) {
    const JointState s{log.theta.col(k), log.theta_dot.col(k), log.theta_ddot.col(k)};
    if (robot) out.col(k) += inverse_dynamics(*robot, s);
    if (loss) out.col(k) += loss_torque(*loss, s);
  }
  return out;
}

}  // namespace

CompositionParts parts(Composition c) {
  switch (c) {
    case Composition::P1: return {true, false, false};
    case Composition::P2: return {true, true, false};
    case Composition::D: return {false, false, true};
    case Composition::H1: return {true, true, true};
    case Composition::H2: return {true, false, true};
    case Composition::H3: return {false, true, true};
  }
  return {};
}

std::string to_string(Composition c) {
  switch (c) {
    case Composition::P1: return "P1";
    case Composition::P2: return "P2";
    case Composition::D: return "D";
    case Composition::H1: return "H1";
    case Composition::H2: return "H2";
    case Composition::H3: return "H3";
  }
  return "?";
}

Composition composition_from_string(const std::string& name) {
  for (Composition c : {Composition::P1, Composition::P2, Composition::D, Composition::H1,
                        Composition::H2, Composition::H3}) {
    if (to_string(c) == name) return c;
  }
  throw ContractError("unknown composition '" + name + "' (expected P1, P2, D, H1, H2 or H3)");
}

void HybridModel::validate() const {
  const CompositionParts p = parts(composition);
  const std::string name = to_string(composition);
  require(p.eom == physics.has_value(), name + ": equations-of-motion model " +
                                            (p.eom ? "missing" : "not expected"));
  require(p.loss == loss.has_value(), name + ": loss parameters " + (p.loss ? "missing" : "not expected"));
  if (physics) physics->validate();
  if (loss) {
    require(loss->size() >= 6, name + ": loss parameters must cover six joints");
  }
  require(window_len >= 1, name + ": window length must be >= 1");
  if (p.trees) {
    const auto channels = group_channels(group);
    require(trees.size() == channels.size(), name + ": expected one tree ensemble per channel");
    const Eigen::Index cols = static_cast<Eigen::Index>(values_per_stamp(group)) * window_len;
    for (const auto& t : trees) {
      require(t.n_features == cols, name + ": tree ensemble expects a different window layout");
    }
    require(normalization.empty() || normalization.mean.size() == cols,
            name + ": normalization size mismatch");
  } else {
    require(trees.empty(), name + ": tree ensembles not expected");
  }
}

Eigen::MatrixXd physics_part(const HybridModel& model, const TrajectoryLog& log) {
  const CompositionParts p = parts(model.composition);
  const auto channels = group_channels(model.group);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(channels.size()), log.n_samples());
  if (!p.eom && !p.loss) return out;
  const Eigen::MatrixXd full = full_physics(p.eom ? &*model.physics : nullptr,
                                            p.loss ? &*model.loss : nullptr, log);
  for (std::size_t c = 0; c < channels.size(); ++c) out.row(static_cast<Eigen::Index>(c)) = full.row(channels[c]);
  return out;
}

Eigen::MatrixXd tree_part(const HybridModel& model, const TrajectoryLog& log) {
  const auto channels = group_channels(model.group);
  const auto n_ch = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_ch, log.n_samples());
  if (!parts(model.composition).trees) return out;
  require(log.n_samples() >= model.window_len, "tree_part: log shorter than the model window");
  Dataset ds = build_features(log, model.group, model.window_len);
  if (!model.normalization.empty()) apply_normalization(model.normalization, ds.features);
  const Eigen::Index first = model.window_len - 1;
  out.leftCols(first).setConstant(kNaN);
  for (Eigen::Index c = 0; c < n_ch; ++c) {
    out.row(c).segment(first, ds.rows()) = model.trees[static_cast<std::size_t>(c)].predict(ds.features).transpose();
  }
  return out;
}

Eigen::MatrixXd predict_log(const HybridModel& model, const TrajectoryLog& log) {
  require(log.n_joints() >= 6, "predict_log: logs must carry six joints");
  return physics_part(model, log) + tree_part(model, log);
}

Eigen::VectorXd predict_torque(const HybridModel& model, const TrajectoryLog& log, Eigen::Index k) {
  require(k >= model.window_len - 1 && k < log.n_samples(), "predict_torque: sample index outside the log");
  const Eigen::Index first = k - model.window_len + 1;
  return predict_log(model, log.slice(first, k + 1)).rightCols(1);
}

HybridModel train_hybrid(Composition composition, ChannelGroup group,
                         const std::vector<TrajectoryLog>& logs, const std::optional<RobotModel>& physics,
                         const std::optional<LossParams>& loss, const HybridTrainOptions& options) {
  HybridModel model;
  model.composition = composition;
  model.group = group;
  const CompositionParts p = parts(composition);
  if (p.eom) model.physics = physics;
  if (p.loss) model.loss = loss;
  if (!p.trees) {
    model.validate();
    return model;
  }
  model.window_len = options.window_len;
  require(!p.eom || physics.has_value(), to_string(composition) + ": equations-of-motion model missing");
  require(!p.loss || loss.has_value(), to_string(composition) + ": loss parameters missing");

  Dataset ds = build_features(logs, group, options.window_len);
  // Replace measured torques by the residual the trees must explain.
  Eigen::Index row = 0;
  for (const auto& log : logs) {
    require(log.has_torques, "train_hybrid: training logs need measured torques");
    const Eigen::MatrixXd phys = physics_part(model, log);
    const Eigen::Index rows = log.n_samples() - options.window_len + 1;
    ds.labels.middleRows(row, rows) -= phys.rightCols(rows).transpose();
    row += rows;
  }
  if (options.normalize) {
    model.normalization = fit_normalization(ds.features);
    apply_normalization(model.normalization, ds.features);
  }
  for (Eigen::Index c = 0; c < ds.labels.cols(); ++c) {
    model.trees.push_back(train_gbt(ds.features, ds.labels.col(c), options.params));
  }
  model.validate();
  return model;
}

nlohmann::json to_json(const HybridModel& model) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["composition"] = to_string(model.composition);
  j["group"] = to_string(model.group);
  j["window_len"] = model.window_len;
  if (model.physics) j["physics"] = robot_to_json(*model.physics);
  if (model.loss) j["loss_params"] = loss_to_json(*model.loss);
  if (!model.normalization.empty()) {
    j["normalization"] = {{"mean", vec_to_json(model.normalization.mean)},
                          {"std", vec_to_json(model.normalization.std)}};
  }
  j["trees"] = nlohmann::json::array();
  for (const auto& t : model.trees) j["trees"].push_back(to_json(t));
  return j;
}

HybridModel hybrid_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ConfigError("model: unsupported format_version " + std::to_string(version));
    }
    HybridModel m;
    m.composition = composition_from_string(j.at("composition").get<std::string>());
    m.group = group_from_string(j.at("group").get<std::string>());
    m.window_len = j.at("window_len").get<int>();
    if (j.contains("physics")) m.physics = robot_from_json(j.at("physics"));
    if (j.contains("loss_params")) m.loss = loss_from_json(j.at("loss_params"));
    if (j.contains("normalization")) {
      m.normalization.mean = vec_from_json(j.at("normalization").at("mean"));
      m.normalization.std = vec_from_json(j.at("normalization").at("std"));
    }
    for (const auto& t : j.at("trees")) m.trees.push_back(ensemble_from_json(t));
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  } catch (const ContractError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

void save_model(const HybridModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file " + path);
  out << to_json(model).dump() << '\n';
}

HybridModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return hybrid_from_json(j);
}

int ModelSuite::max_window() const {
  int w = 1;
  for (const auto& m : members) w = std::max(w, m.window_len);
  return w;
}

Eigen::MatrixXd ModelSuite::predict_log(const TrajectoryLog& log) const {
  const Eigen::Index n = log.n_joints();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, log.n_samples(), kNaN);
  std::vector<bool> covered(static_cast<std::size_t>(n), false);
  for (const auto& m : members) {
    const Eigen::MatrixXd pred = hdyn::predict_log(m, log);
    const auto channels = group_channels(m.group);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      out.row(channels[c]) = pred.row(static_cast<Eigen::Index>(c));
      covered[static_cast<std::size_t>(channels[c])] = true;
    }
  }
  bool all = true;
  for (bool c : covered) all = all && c;
  if (!all) {
    require(fallback_robot.has_value() && fallback_loss.has_value(),
            "ModelSuite: some joints have no model and no physics fallback is set");
    const Eigen::MatrixXd phys = full_physics(&*fallback_robot, &*fallback_loss, log);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!covered[static_cast<std::size_t>(j)]) out.row(j) = phys.row(j);
    }
  }
  const int first = max_window() - 1;
  out.leftCols(std::min<Eigen::Index>(first, out.cols())).setConstant(kNaN);
  return out;
}

ModelSuite train_suite(Composition composition, const std::vector<ChannelGroup>& groups,
                       const std::vector<TrajectoryLog>& logs, const RobotModel& robot,
                       const LossParams& loss, const HybridTrainOptions& options) {
  ModelSuite suite;
  for (ChannelGroup g : groups) {
    suite.members.push_back(train_hybrid(composition, g, logs, robot, loss, options));
  }
  suite.fallback_robot = robot;
  suite.fallback_loss = loss;
  return suite;
}

nlohmann::json to_json(const ModelSuite& suite) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["members"] = nlohmann::json::array();
  for (const auto& m : suite.members) j["members"].push_back(to_json(m));
  if (suite.fallback_robot) j["fallback_robot"] = robot_to_json(*suite.fallback_robot);
  if (suite.fallback_loss) j["fallback_loss"] = loss_to_json(*suite.fallback_loss);
  return j;
}

ModelSuite suite_from_json(const nlohmann::json& j) {
  try {
    ModelSuite s;
    for (const auto& m : j.at("members")) s.members.push_back(hybrid_from_json(m));
    if (j.contains("fallback_robot")) s.fallback_robot = robot_from_json(j.at("fallback_robot"));
    if (j.contains("fallback_loss")) s.fallback_loss = loss_from_json(j.at("fallback_loss"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model suite: ") + e.what());
  }
}

}  // namespace hdyn
