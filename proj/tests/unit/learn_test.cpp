#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/dynamics.hpp"
#include "hdyn/learn/grid_search.hpp"
#include "hdyn/learn/identify.hpp"
#include "hdyn/learn/metrics.hpp"
#include "hdyn/plant/plant.hpp"
#include "hdyn/traj/trajgen.hpp"
#include "test_util.hpp"

namespace hdyn {
namespace {

// Back-and-forth motion through a few poses so every joint reverses.
JointTrajectory sweep_reference(double scale, int repeats) {
  std::vector<Eigen::VectorXd> configs{
      Eigen::VectorXd::Zero(6),
      (Eigen::VectorXd(6) << 0.6, 0.3, -0.5, 0.8, -0.6, 0.9).finished() * scale,
      (Eigen::VectorXd(6) << -0.5, -0.2, 0.6, -0.7, 0.5, -0.8).finished() * scale};
  std::vector<double> speeds(static_cast<std::size_t>(repeats), 0.5);
  for (std::size_t i = 0; i < speeds.size(); ++i) speeds[i] = 0.3 + 0.2 * static_cast<double>(i % 3);
  return sample_set(enumerate_legs(configs, speeds), reference_motion_limits());
}

TrajectoryLog constant_log(Eigen::Index samples) {
  TrajectoryLog log = TrajectoryLog::allocate(6, samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    log.times[k] = 0.008 * k;
    log.theta.col(k) = Eigen::VectorXd::LinSpaced(6, 0.1, 0.6);
    log.theta_dot.col(k).setConstant(0.2);
    log.theta_ddot.col(k).setConstant(-0.3);
    log.tau_measured.col(k).setConstant(1.5);
  }
  return log;
}

// ---------------------------------------------------------------- features

TEST(Features, WindowBoundaryGivesOneRow) {
  const Dataset ds = build_features(constant_log(10), ChannelGroup::Joints123, 10);
  EXPECT_EQ(ds.rows(), 1);
  EXPECT_EQ(ds.columns(), 90);
  EXPECT_EQ(ds.labels.cols(), 3);
  EXPECT_THROW(build_features(constant_log(9), ChannelGroup::Joints123, 10), ContractError);
}

TEST(Features, WristGroupLayout) {
  const Dataset ds = build_features(constant_log(12), ChannelGroup::Joint5, 10);
  EXPECT_EQ(ds.rows(), 3);
  EXPECT_EQ(ds.columns(), 80);
  EXPECT_EQ(ds.labels.cols(), 1);
}

TEST(Features, ConstantLogGivesIdenticalRows) {
  const Dataset ds = build_features(constant_log(30), ChannelGroup::Joints123, 10);
  for (Eigen::Index r = 1; r < ds.rows(); ++r) EXPECT_EQ(ds.features.row(r), ds.features.row(0));
}

TEST(Features, OldestStampFirstInTableOrder) {
  TrajectoryLog log = constant_log(3);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (int j = 0; j < 6; ++j) {
      log.theta(j, k) = 100 * k + j;
      log.theta_dot(j, k) = 100 * k + 10 + j;
      log.theta_ddot(j, k) = 100 * k + 20 + j;
    }
  }
  const Dataset a = build_features(log, ChannelGroup::Joints123, 2);
  ASSERT_EQ(a.rows(), 2);
  const double expect_a[] = {100, 101, 102, 110, 111, 112, 120, 121, 122,
                             200, 201, 202, 210, 211, 212, 220, 221, 222};
  for (int c = 0; c < 18; ++c) EXPECT_EQ(a.features(1, c), expect_a[c]);
  const Dataset b = build_features(log, ChannelGroup::Joint4, 1);
  const double expect_b[] = {0, 1, 2, 3, 4, 5, 13, 23};
  for (int c = 0; c < 8; ++c) EXPECT_EQ(b.features(0, c), expect_b[c]);
}

TEST(Normalization, TwoValueColumn) {
  Dataset ds;
  ds.features = Eigen::MatrixXd(2, 2);
  ds.features << 1.0, 5.0, 3.0, 5.0;
  ds.labels = Eigen::MatrixXd::Zero(2, 1);
  const Dataset n = normalize(ds);
  EXPECT_DOUBLE_EQ(n.features(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(n.features(1, 0), 1.0);
  EXPECT_EQ(n.features.col(1), ds.features.col(1));  // zero variance passes through
  const Dataset back = denormalize(n);
  EXPECT_LT((back.features - ds.features).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalization, RoundTripRandom) {
  std::mt19937_64 rng(2);
  Dataset ds;
  ds.features = Eigen::MatrixXd::Random(50, 7) * 40.0;
  ds.labels = Eigen::MatrixXd::Zero(50, 1);
  const Dataset n = normalize(ds);
  EXPECT_LT((denormalize(n).features - ds.features).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(n.features.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Splits, BlockAndRow) {
  std::vector<TrajectoryLog> logs;
  for (int i = 0; i < 5; ++i) logs.push_back(constant_log(20 + i));
  const LogSplit blocks = split_blocks(logs, 0.8);
  ASSERT_EQ(blocks.train.size(), 4u);
  ASSERT_EQ(blocks.validation.size(), 1u);
  EXPECT_EQ(blocks.validation[0].n_samples(), 24);
  const LogSplit single = split_blocks({constant_log(100)}, 0.8);
  EXPECT_EQ(single.train[0].n_samples(), 80);
  EXPECT_EQ(single.validation[0].times[0], single.train[0].times[79] + 0.008);

  const Dataset ds = build_features(logs, ChannelGroup::Joint4, 1);
  const DatasetSplit rows = split_rows(ds, 0.8, 1);
  EXPECT_EQ(rows.train.rows() + rows.validation.rows(), ds.rows());
}

// ---------------------------------------------------------------- trees

GbtHyperParams exact_params(int depth, int rounds) {
  GbtHyperParams p;
  p.max_depth = depth;
  p.n_estimators = rounds;
  p.learning_rate = 1.0;
  p.reg_lambda = 0.0;
  p.min_child_weight = 1.0;
  return p;
}

TEST(Gbt, ConstantLabels) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 2.5);
  const GbtEnsemble e = train_gbt(x, y, exact_params(3, 5));
  EXPECT_DOUBLE_EQ(e.base_score, 2.5);
  const Eigen::VectorXd p = e.predict(Eigen::MatrixXd::Random(25, 3) * 10.0);
  EXPECT_LT((p.array() - 2.5).abs().maxCoeff(), 1e-12);
  for (const auto& t : e.trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(Gbt, StepIsFitExactly) {
  Eigen::MatrixXd x(8, 1);
  x << -4, -3, -2, -1, 0, 1, 2, 3;
  Eigen::VectorXd y(8);
  y << -1, -1, -1, -1, 1, 1, 1, 1;
  const GbtEnsemble e = train_gbt(x, y, exact_params(1, 1));
  ASSERT_EQ(e.trees[0].nodes.size(), 3u);
  EXPECT_EQ(e.trees[0].nodes[0].threshold, -0.5);
  EXPECT_LT((e.predict(x) - y).cwiseAbs().maxCoeff(), 1e-12);
}

// Independent recursive oracle: enumerate every midpoint of every feature.
struct OracleNode {
  int feature = -1;
  double threshold = 0.0;
  double weight = 0.0;
  std::unique_ptr<OracleNode> left, right;
};

std::unique_ptr<OracleNode> oracle_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& g,
                                        const std::vector<int>& rows, int depth, const GbtHyperParams& p) {
  auto node = std::make_unique<OracleNode>();
  double G = 0.0;
  for (int r : rows) G += g[r];
  const double H = static_cast<double>(rows.size());
  auto leaf = [&] {
    node->weight = -G / (H + p.reg_lambda) * p.learning_rate;
    return std::move(node);
  };
  if (depth == p.max_depth) return leaf();
  double best = 0.0;
  int best_f = -1;
  double best_t = 0.0;
  for (int f = 0; f < x.cols(); ++f) {
    std::vector<double> vals;
    for (int r : rows) vals.push_back(x(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double t = 0.5 * (vals[i] + vals[i + 1]);
      double gl = 0.0, hl = 0.0;
      for (int r : rows) {
        if (x(r, f) < t) gl += g[r], hl += 1.0;
      }
      const double gr = G - gl, hr = H - hl;
      if (hl < p.min_child_weight || hr < p.min_child_weight) continue;
      const double gain = 0.5 * (gl * gl / (hl + p.reg_lambda) + gr * gr / (hr + p.reg_lambda) -
                                 G * G / (H + p.reg_lambda)) - p.gamma;
      if (gain > best) best = gain, best_f = f, best_t = t;
    }
  }
  if (best_f < 0) return leaf();
  std::vector<int> lr, rr;
  for (int r : rows) (x(r, best_f) < best_t ? lr : rr).push_back(r);
  node->feature = best_f;
  node->threshold = best_t;
  node->left = oracle_tree(x, g, lr, depth + 1, p);
  node->right = oracle_tree(x, g, rr, depth + 1, p);
  return node;
}

void expect_same_tree(const GbtTree& t, int i, const OracleNode& o) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  ASSERT_EQ(n.feature, o.feature);
  if (o.feature < 0) {
    EXPECT_NEAR(n.weight, o.weight, 1e-12);
    return;
  }
  EXPECT_EQ(n.threshold, o.threshold);
  expect_same_tree(t, n.left, *o.left);
  expect_same_tree(t, n.right, *o.right);
}

TEST(Gbt, FirstTreeMatchesBruteForceOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 6);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x(200, 4);
    Eigen::VectorXd y(200);
    for (int r = 0; r < 200; ++r) {
      x(r, 0) = u(rng);
      x(r, 1) = coarse(rng);  // repeated values exercise tie handling
      x(r, 2) = u(rng);
      x(r, 3) = coarse(rng) * 0.5;
      y[r] = std::sin(3 * x(r, 0)) + 0.3 * x(r, 1) - x(r, 2) * x(r, 3) + 0.1 * u(rng);
    }
    GbtHyperParams p = exact_params(1 + trial % 3, 1);
    p.reg_lambda = 0.5 * trial;
    p.learning_rate = 0.3;
    p.min_child_weight = 1.0 + trial;
    p.gamma = 0.01 * trial;
    const GbtEnsemble e = train_gbt(x, y, p);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(200, y.mean()) - y;
    std::vector<int> rows(200);
    std::iota(rows.begin(), rows.end(), 0);
    const auto oracle = oracle_tree(x, g, rows, 0, p);
    expect_same_tree(e.trees[0], 0, *oracle);
  }
}

TEST(Gbt, DeterministicAndMonotoneLoss) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd x(300, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = std::uniform_real_distribution<double>(-2, 2)(rng);
  const Eigen::VectorXd y = (x.col(0).array() * x.col(1).array() + x.col(2).array().sin()).matrix();
  GbtHyperParams p;
  p.max_depth = 4;
  p.n_estimators = 30;
  p.reg_alpha = 0.1;
  const GbtEnsemble full = train_gbt(x, y, p);
  for (std::size_t r = 1; r < full.train_loss.size(); ++r) {
    EXPECT_LE(full.train_loss[r], full.train_loss[r - 1] + 1e-12);
  }
  for (const auto& t : full.trees) EXPECT_LE(t.depth(), p.max_depth);
  p.subsample = 0.7;
  p.colsample_bytree = 0.6;
  p.seed = 99;
  const GbtEnsemble a = train_gbt(x, y, p);
  const GbtEnsemble b = train_gbt(x, y, p);
  EXPECT_EQ(to_json(a), to_json(b));
  p.seed = 100;
  EXPECT_NE(to_json(train_gbt(x, y, p)), to_json(a));
}

TEST(Gbt, JsonRoundTrip) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(100, 3);
  const Eigen::VectorXd y = x.col(0) * 3.0 - x.col(2);
  GbtHyperParams p;
  p.max_depth = 3;
  p.n_estimators = 10;
  const GbtEnsemble e = train_gbt(x, y, p);
  const GbtEnsemble back = ensemble_from_json(nlohmann::json::parse(to_json(e).dump()));
  EXPECT_LT((back.predict(x) - e.predict(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gbt, RejectsBadHyperparams) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Random(10);
  GbtHyperParams p;
  p.learning_rate = 0.0;
  EXPECT_THROW(train_gbt(x, y, p), ContractError);
  p = {};
  p.subsample = 1.5;
  EXPECT_THROW(train_gbt(x, y, p), ContractError);
  p = {};
  EXPECT_THROW(train_gbt(x.topRows(1), y.head(1), p), ContractError);
}

// ---------------------------------------------------------------- identification

TEST(Identify, RecoversLossFromNoiselessPlant) {
  PlantConfig plant = ideal_plant();
  const TrajectoryLog log = simulate_tracking(plant, sweep_reference(1.0, 1), nullptr, 1);
  const LossParams got = identify_loss_params({log}, plant.model);
  EXPECT_LT((got.b_m - plant.true_loss.b_m).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((got.c_m - plant.true_loss.c_m).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((got.f_c - plant.true_loss.f_c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Identify, LosslessPlantGivesZero) {
  PlantConfig plant = ideal_plant();
  plant.true_loss = LossParams::zeros(6);
  const TrajectoryLog log = simulate_tracking(plant, sweep_reference(1.0, 1), nullptr, 1);
  const LossParams got = identify_loss_params({log}, plant.model);
  EXPECT_LT(got.b_m.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(got.c_m.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(got.f_c.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Identify, NoisyTorquesWithinFivePercent) {
  PlantConfig plant = ideal_plant();
  plant.torque_noise_std = Eigen::VectorXd::Constant(6, 0.1);
  const TrajectoryLog log = simulate_tracking(plant, sweep_reference(1.0, 55), nullptr, 3);
  ASSERT_GE(log.n_samples(), 50000);
  const LossParams got = identify_loss_params({log}, plant.model);
  const LossParams& truth = plant.true_loss;
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(got.b_m[j], truth.b_m[j], 0.05 * truth.b_m[j]) << "joint " << j + 1;
    EXPECT_NEAR(got.c_m[j], truth.c_m[j], 0.05 * truth.c_m[j]) << "joint " << j + 1;
    EXPECT_NEAR(got.f_c[j], truth.f_c[j], 0.05 * truth.f_c[j]) << "joint " << j + 1;
  }
}

TEST(Identify, StillJointIsRankDeficient) {
  PlantConfig plant = ideal_plant();
  TrajectoryLog log = simulate_tracking(plant, sweep_reference(1.0, 1), nullptr, 1);
  log.theta_dot.row(3).setZero();
  log.theta_ddot.row(3).setZero();
  try {
    identify_loss_params({log}, plant.model);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("joint 4"), std::string::npos);
  }
}

// ---------------------------------------------------------------- hybrid models

class HybridFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    PlantConfig plant = reference_plant();
    train_ = new std::vector<TrajectoryLog>{simulate_tracking(plant, sweep_reference(1.0, 3), nullptr, 5)};
    test_ = new std::vector<TrajectoryLog>{simulate_tracking(plant, sweep_reference(0.8, 1), nullptr, 6),
                                           simulate_tracking(plant, sweep_reference(0.9, 1), nullptr, 7)};
  }
  static void TearDownTestSuite() {
    delete train_;
    delete test_;
  }
  static HybridTrainOptions options() {
    HybridTrainOptions o;
    o.window_len = 3;
    o.params.max_depth = 5;
    o.params.n_estimators = 60;
    o.params.learning_rate = 0.2;
    return o;
  }
  static std::vector<TrajectoryLog>* train_;
  static std::vector<TrajectoryLog>* test_;
};
std::vector<TrajectoryLog>* HybridFixture::train_ = nullptr;
std::vector<TrajectoryLog>* HybridFixture::test_ = nullptr;

TEST_F(HybridFixture, CompositionAssetsAreChecked) {
  HybridModel m;
  m.composition = Composition::P2;
  m.physics = reference_robot();
  EXPECT_THROW(m.validate(), ContractError);
  m.loss = reference_loss();
  EXPECT_NO_THROW(m.validate());
  m.composition = Composition::H3;
  EXPECT_THROW(m.validate(), ContractError);
}

TEST_F(HybridFixture, StaticPoseP1IsGravity) {
  HybridModel m;
  m.composition = Composition::P1;
  m.physics = reference_robot();
  const Eigen::VectorXd q = (Eigen::VectorXd(6) << 0.1, 0.5, -0.7, 0.2, 0.3, 0.4).finished();
  TrajectoryLog log = TrajectoryLog::from_reference(JointTrajectory::stationary(q, 3, 0.008));
  const Eigen::VectorXd pred = predict_torque(m, log, 2);
  EXPECT_LT((pred - gravity_torque(reference_robot(), q).head(3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(HybridFixture, P2MatchesZeroResidualPlant) {
  const PlantConfig plant = ideal_plant();
  const TrajectoryLog log = simulate_tracking(plant, sweep_reference(1.0, 1), nullptr, 1);
  for (ChannelGroup g : {ChannelGroup::Joints123, ChannelGroup::Joint4, ChannelGroup::Joint5}) {
    const HybridModel m = train_hybrid(Composition::P2, g, {}, plant.model, plant.true_loss, options());
    const Eigen::MatrixXd pred = predict_log(m, log);
    const auto ch = group_channels(g);
    for (std::size_t c = 0; c < ch.size(); ++c) {
      const double err = (pred.row(static_cast<Eigen::Index>(c)) - log.tau_measured.row(ch[c])).cwiseAbs().maxCoeff();
      EXPECT_LT(err, 1e-6);
    }
  }
}

TEST_F(HybridFixture, H1MinusTreesIsP2) {
  const HybridModel h1 =
      train_hybrid(Composition::H1, ChannelGroup::Joint4, *train_, reference_robot(), reference_loss(), options());
  HybridModel p2 = h1;
  p2.composition = Composition::P2;
  p2.trees.clear();
  const TrajectoryLog& log = (*test_)[0];
  // The prediction is the physics part plus the tree part, and the physics part is P2.
  const Eigen::Index valid = log.n_samples() - 2;
  EXPECT_EQ(physics_part(h1, log), predict_log(p2, log));
  EXPECT_EQ(predict_log(h1, log).rightCols(valid),
            (physics_part(h1, log) + tree_part(h1, log)).rightCols(valid));

  HybridModel zeroed = h1;
  for (auto& e : zeroed.trees) {
    e.base_score = 0.0;
    for (auto& t : e.trees)
      for (auto& n : t.nodes) n.weight = 0.0;
  }
  const Eigen::MatrixXd gap = predict_log(zeroed, log) - predict_log(p2, log);
  EXPECT_EQ(gap.rightCols(valid).cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(HybridFixture, ResidualLearningImprovesOnPhysics) {
  const auto o = options();
  const RobotModel robot = reference_robot();
  const LossParams loss = identify_loss_params(*train_, robot);
  std::vector<HybridModel> models{
      train_hybrid(Composition::P1, ChannelGroup::Joints123, *train_, robot, std::nullopt, o),
      train_hybrid(Composition::P2, ChannelGroup::Joints123, *train_, robot, loss, o),
      train_hybrid(Composition::H1, ChannelGroup::Joints123, *train_, robot, loss, o)};
  const auto stats = evaluate_models(models, {"P1", "P2", "H1"}, *test_);
  EXPECT_GT(stats[0].mean, stats[1].mean);
  EXPECT_GT(stats[1].mean, stats[2].mean);
}

TEST_F(HybridFixture, SerializationRoundTrip) {
  auto o = options();
  o.normalize = true;
  const HybridModel m =
      train_hybrid(Composition::H2, ChannelGroup::Joints123, *train_, reference_robot(), std::nullopt, o);
  const HybridModel back = hybrid_from_json(nlohmann::json::parse(to_json(m).dump()));
  const TrajectoryLog& log = (*test_)[1];
  const Eigen::MatrixXd a = predict_log(m, log).rightCols(log.n_samples() - 2);
  const Eigen::MatrixXd b = predict_log(back, log).rightCols(log.n_samples() - 2);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(HybridFixture, TimeShiftDoesNotChangePredictions) {
  const HybridModel m = train_hybrid(Composition::D, ChannelGroup::Joint5, *train_, std::nullopt,
                                     std::nullopt, options());
  TrajectoryLog shifted = (*test_)[0];
  shifted.times.array() += 123.0;
  const Eigen::MatrixXd a = predict_log(m, (*test_)[0]).rightCols(shifted.n_samples() - 2);
  const Eigen::MatrixXd b = predict_log(m, shifted).rightCols(shifted.n_samples() - 2);
  EXPECT_EQ(a, b);
}

TEST_F(HybridFixture, SuiteCoversAllJoints) {
  const ModelSuite suite =
      train_suite(Composition::H1, {ChannelGroup::Joints123, ChannelGroup::Joint4, ChannelGroup::Joint5},
                  *train_, reference_robot(), reference_loss(), options());
  const TrajectoryLog& log = (*test_)[0];
  const Eigen::MatrixXd pred = suite.predict_log(log);
  EXPECT_TRUE(pred.rightCols(log.n_samples() - 2).allFinite());
  EXPECT_TRUE(std::isnan(pred(0, 0)));
  const ModelSuite back = suite_from_json(nlohmann::json::parse(to_json(suite).dump()));
  EXPECT_LT((back.predict_log(log) - pred).rightCols(log.n_samples() - 2).cwiseAbs().maxCoeff(), 1e-12);
}

// ---------------------------------------------------------------- metrics

TEST(Metrics, Examples) {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
  EXPECT_EQ(metric_rmse(a, a), 0.0);
  EXPECT_EQ(metric_mse(a, a), 0.0);
  EXPECT_EQ(metric_mae(a, a), 0.0);
  const Eigen::VectorXd b = a.array() + 3.0;
  EXPECT_DOUBLE_EQ(metric_rmse(b, a), 3.0);
  EXPECT_DOUBLE_EQ(metric_mse(b, a), 9.0);
  EXPECT_DOUBLE_EQ(metric_mae(b, a), 3.0);
  const Eigen::Vector2d e(0.0, 4.0);
  EXPECT_DOUBLE_EQ(metric_rmse(e, Eigen::Vector2d::Zero()), std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(metric_mae(e, Eigen::Vector2d::Zero()), 2.0);
  EXPECT_THROW(metric_rmse(Eigen::VectorXd(), Eigen::VectorXd()), ContractError);
}

TEST(Metrics, SingleTrajectoryStats) {
  const ModelStats s = summarize("m", {2.5});
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_EQ(s.max, 2.5);
  EXPECT_EQ(s.min, 2.5);
  const ModelStats t = summarize("m", {1.0, 3.0});
  EXPECT_DOUBLE_EQ(t.std, 1.0);
  EXPECT_NE(format_report_table({s, t}).find("mean"), std::string::npos);
}

// ---------------------------------------------------------------- grid search

HyperSpace two_param_space() {
  HyperSpace s;
  s.names = {"max_depth", "reg_lambda"};
  s.values = {{2, 4, 6}, {0.0, 0.5, 1.0, 2.0}};
  s.passes = 3;
  return s;
}

TEST(GridSearch, EvaluationCount) {
  int calls = 0;
  const auto r = coordinate_grid_search(
      two_param_space(), [&](const GbtHyperParams&) { return static_cast<double>(++calls % 5); }, {});
  EXPECT_EQ(calls, 21);
  EXPECT_EQ(r.trace.size(), 21u);
}

TEST(GridSearch, SeparableObjectiveSolvedInOnePass) {
  HyperSpace s = two_param_space();
  s.passes = 1;
  auto f = [](const GbtHyperParams& p) {
    return std::pow(p.max_depth - 4.0, 2) + std::pow(p.reg_lambda - 1.0, 2);
  };
  const auto r = coordinate_grid_search(s, f, {});
  EXPECT_EQ(r.best.max_depth, 4);
  EXPECT_EQ(r.best.reg_lambda, 1.0);
  EXPECT_EQ(r.best_score, 0.0);
}

TEST(GridSearch, NeverWorseThanInitialAndReproducible) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = std::uniform_real_distribution<double>(-1, 1)(rng);
    auto f = [a](const GbtHyperParams& p) {
      return std::sin(a * p.max_depth * p.reg_lambda) + std::cos(p.max_depth + a);
    };
    GbtHyperParams init;
    init.max_depth = 6;
    init.reg_lambda = 0.5;
    const auto r = coordinate_grid_search(two_param_space(), f, init);
    EXPECT_LE(r.best_score, f(init));
    const auto again = coordinate_grid_search(two_param_space(), f, init);
    ASSERT_EQ(again.trace.size(), r.trace.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(again.trace[i].score, r.trace[i].score);
  }
}

TEST(GridSearch, ObjectiveFailureCarriesParams) {
  auto f = [](const GbtHyperParams& p) -> double {
    if (p.max_depth == 4) throw std::runtime_error("boom");
    return 1.0;
  };
  try {
    coordinate_grid_search(two_param_space(), f, {});
    FAIL() << "expected SearchError";
  } catch (const SearchError& e) {
    EXPECT_EQ(e.params().max_depth, 4);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(GridSearch, RejectsBadSpace) {
  HyperSpace s = two_param_space();
  s.names[1] = "max_depth";
  EXPECT_THROW(coordinate_grid_search(s, [](const GbtHyperParams&) { return 0.0; }, {}), ContractError);
  s = two_param_space();
  s.values[0].clear();
  EXPECT_THROW(coordinate_grid_search(s, [](const GbtHyperParams&) { return 0.0; }, {}), ContractError);
}

}  // namespace
}  // namespace hdyn
