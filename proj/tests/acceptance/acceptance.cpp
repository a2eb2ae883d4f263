// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hdyn/dynamics/dynamics.hpp"
#include "hdyn/dynamics/kinematics.hpp"
#include "hdyn/harness/config.hpp"
#include "hdyn/harness/experiments.hpp"
#include "hdyn/harness/stages.hpp"
#include "hdyn/learn/gbt.hpp"
#include "hdyn/learn/grid_search.hpp"
#include "hdyn/learn/identify.hpp"
#include "hdyn/plant/plant.hpp"

namespace hdyn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Eigen::VectorXd uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

// ---------------------------------------------------------------- 1 dynamics

// Planar 2R arm, point masses at the link tips, gravity along -y.
Eigen::Vector2d lagrangian_2r(double l1, double l2, double m1, double m2, double g, const Eigen::Vector2d& q,
                              const Eigen::Vector2d& qd, const Eigen::Vector2d& qdd) {
  const double c2 = std::cos(q[1]), s2 = std::sin(q[1]);
  const double m11 = m1 * l1 * l1 + m2 * (l1 * l1 + 2.0 * l1 * l2 * c2 + l2 * l2);
  const double m12 = m2 * (l1 * l2 * c2 + l2 * l2);
  const double m22 = m2 * l2 * l2;
  const double h = m2 * l1 * l2 * s2;
  const double g1 = (m1 + m2) * g * l1 * std::cos(q[0]) + m2 * g * l2 * std::cos(q[0] + q[1]);
  const double g2 = m2 * g * l2 * std::cos(q[0] + q[1]);
  return {m11 * qdd[0] + m12 * qdd[1] - h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]) + g1,
          m12 * qdd[0] + m22 * qdd[1] + h * qd[0] * qd[0] + g2};
}

void dynamics_correctness(Outcome& o) {
  const double l1 = 0.7, l2 = 0.5, m1 = 3.0, m2 = 1.2, g = 9.81;
  const RobotModel arm = planar_arm({l1, l2}, {m1, m2}, g);
  std::mt19937_64 rng(1);
  double oracle_gap = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector2d q = uniform(rng, 2, -3.1, 3.1);
    const Eigen::Vector2d qd = uniform(rng, 2, -3.0, 3.0);
    const Eigen::Vector2d qdd = uniform(rng, 2, -10.0, 10.0);
    const Eigen::VectorXd tau = inverse_dynamics(arm, {q, qd, qdd});
    oracle_gap = std::max(oracle_gap, (tau - lagrangian_2r(l1, l2, m1, m2, g, q, qd, qdd)).cwiseAbs().maxCoeff());
  }

  const RobotModel robot = reference_robot();
  const LossParams loss = reference_loss();
  double round_trip = 0.0;
  for (int k = 0; k < 1000; ++k) {
    JointState s{uniform(rng, 6, -2.5, 2.5), uniform(rng, 6, -2.0, 2.0), uniform(rng, 6, -5.0, 5.0)};
    const Eigen::VectorXd tau = inverse_dynamics(robot, s) + loss_torque(loss, s);
    const Eigen::VectorXd back = forward_dynamics(robot, s.theta, s.theta_dot, tau, &loss);
    round_trip = std::max(round_trip, (back - s.theta_ddot).cwiseAbs().maxCoeff());
  }

  Eigen::VectorXd x(12);
  x << 0.2, -0.6, 0.9, 0.1, -0.4, 0.3, 0.8, -0.5, 0.4, 1.2, -0.7, 0.9;
  const double h = 2e-4;
  const int steps = 10000;  // 2 s
  const double e0 = mechanical_energy(robot, x.head(6), x.tail(6)).total();
  for (int k = 0; k < steps; ++k) x = free_motion_step(robot, x, h);
  const double drift = std::abs(mechanical_energy(robot, x.head(6), x.tail(6)).total() - e0) / (steps * h);

  o.detail << "2R oracle max gap " << oracle_gap << " N m, round trip " << round_trip << " rad/s^2, energy drift "
           << drift << " J/s";
  o.check(oracle_gap < 1e-9, "oracle gap < 1e-9");
  o.check(round_trip < 1e-8, "round trip < 1e-8");
  o.check(drift < 1e-6, "drift < 1e-6 J/s");
}

// ---------------------------------------------------------------- 2 identification

JointTrajectory excitation(int repeats) {
  const std::vector<Eigen::VectorXd> configs{
      Eigen::VectorXd::Zero(6), (Eigen::VectorXd(6) << 0.6, 0.3, -0.5, 0.8, -0.6, 0.9).finished(),
      (Eigen::VectorXd(6) << -0.5, -0.2, 0.6, -0.7, 0.5, -0.8).finished()};
  std::vector<double> speeds;
  for (int i = 0; i < repeats; ++i) speeds.push_back(0.3 + 0.2 * (i % 3));
  return sample_set(enumerate_legs(configs, speeds), reference_motion_limits());
}

double worst_relative(const LossParams& got, const LossParams& truth) {
  double worst = 0.0;
  for (int j = 0; j < truth.b_m.size(); ++j) {
    worst = std::max({worst, std::abs(got.b_m[j] / truth.b_m[j] - 1.0), std::abs(got.c_m[j] / truth.c_m[j] - 1.0),
                      std::abs(got.f_c[j] / truth.f_c[j] - 1.0)});
  }
  return worst;
}

void loss_identification(Outcome& o) {
  PlantConfig plant = ideal_plant();
  const LossParams exact = identify_loss_params({simulate_tracking(plant, excitation(1), nullptr, 1)}, plant.model);
  const double gap = std::max({(exact.b_m - plant.true_loss.b_m).cwiseAbs().maxCoeff(),
                               (exact.c_m - plant.true_loss.c_m).cwiseAbs().maxCoeff(),
                               (exact.f_c - plant.true_loss.f_c).cwiseAbs().maxCoeff()});
  plant.torque_noise_std = Eigen::VectorXd::Constant(6, 0.1);
  const TrajectoryLog noisy = simulate_tracking(plant, excitation(55), nullptr, 3);
  const LossParams est = identify_loss_params({noisy}, plant.model);
  const double rel = worst_relative(est, plant.true_loss);
  o.detail << "noiseless max error " << gap << ", noisy (" << noisy.n_samples() << " samples) worst relative error "
           << 100.0 * rel << "%";
  o.check(gap < 1e-6, "noiseless within 1e-6");
  o.check(noisy.n_samples() >= 50000, "at least 50k samples");
  o.check(rel < 0.05, "noisy within 5%");
}

// ---------------------------------------------------------------- 3 boosting

struct OracleNode {
  int feature = -1;
  double threshold = 0.0;
  double weight = 0.0;
  std::unique_ptr<OracleNode> left, right;
};

// Exhaustive split search for squared loss with lambda = gamma = 0.
std::unique_ptr<OracleNode> oracle_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& grad,
                                        const std::vector<int>& rows, int depth, const GbtHyperParams& p) {
  auto node = std::make_unique<OracleNode>();
  double sum = 0.0;
  for (int r : rows) sum += grad[r];
  const double count = static_cast<double>(rows.size());
  node->weight = -sum / count * p.learning_rate;
  if (depth == p.max_depth) return node;
  double best = 0.0, best_t = 0.0;
  int best_f = -1;
  for (int f = 0; f < x.cols(); ++f) {
    std::vector<double> v;
    for (int r : rows) v.push_back(x(r, f));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double t = 0.5 * (v[i] + v[i + 1]);
      double gl = 0.0, nl = 0.0;
      for (int r : rows) {
        if (x(r, f) < t) gl += grad[r], nl += 1.0;
      }
      const double nr = count - nl, gr = sum - gl;
      if (nl < p.min_child_weight || nr < p.min_child_weight) continue;
      const double gain = 0.5 * (gl * gl / nl + gr * gr / nr - sum * sum / count);
      if (gain > best) best = gain, best_f = f, best_t = t;
    }
  }
  if (best_f < 0) return node;
  std::vector<int> lr, rr;
  for (int r : rows) (x(r, best_f) < best_t ? lr : rr).push_back(r);
  node->feature = best_f;
  node->threshold = best_t;
  node->left = oracle_tree(x, grad, lr, depth + 1, p);
  node->right = oracle_tree(x, grad, rr, depth + 1, p);
  return node;
}

bool same_tree(const GbtTree& t, int i, const OracleNode& o) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.feature != o.feature) return false;
  if (o.feature < 0) return std::abs(n.weight - o.weight) <= 1e-12;
  return n.threshold == o.threshold && same_tree(t, n.left, *o.left) && same_tree(t, n.right, *o.right);
}

void boosting_correctness(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 5);
  int matched = 0, monotone = 0, round_trips = 0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::MatrixXd x(200, 5);
    Eigen::VectorXd y(200);
    for (int r = 0; r < 200; ++r) {
      x(r, 0) = u(rng);
      x(r, 1) = coarse(rng);
      x(r, 2) = u(rng);
      x(r, 3) = 0.25 * coarse(rng);
      x(r, 4) = u(rng);
      y[r] = std::cos(2.0 * x(r, 0)) + 0.4 * x(r, 1) - x(r, 2) * x(r, 3) + 0.1 * u(rng);
    }
    GbtHyperParams p;
    p.max_depth = 1 + trial % 4;
    p.n_estimators = 40;
    p.learning_rate = 0.3;
    p.reg_lambda = 0.0;
    p.gamma = 0.0;
    p.min_child_weight = 1.0 + trial % 3;
    const GbtEnsemble e = train_gbt(x, y, p);
    const Eigen::VectorXd grad = Eigen::VectorXd::Constant(200, y.mean()) - y;
    std::vector<int> rows(200);
    std::iota(rows.begin(), rows.end(), 0);
    matched += same_tree(e.trees[0], 0, *oracle_tree(x, grad, rows, 0, p));
    bool down = true;
    for (std::size_t r = 1; r < e.train_loss.size(); ++r) down = down && e.train_loss[r] <= e.train_loss[r - 1];
    monotone += down;
    const GbtEnsemble back = ensemble_from_json(json::parse(to_json(e).dump()));
    round_trips += (back.predict(x) - e.predict(x)).cwiseAbs().maxCoeff() <= 1e-12;
  }
  o.detail << "first tree matches oracle " << matched << "/" << trials << ", monotone loss " << monotone << "/"
           << trials << ", round trip " << round_trips << "/" << trials;
  o.check(matched == trials, "oracle match");
  o.check(monotone == trials, "non-increasing loss");
  o.check(round_trips == trials, "serialization within 1e-12");
}

// ---------------------------------------------------------------- 4 model ranking

DataGenConfig training_data(std::size_t keep) {
  DataGenConfig c = DataGenConfig::from_json(default_config()["data"]);
  c.keep = keep;
  return c;
}

// Noise-free held-out motions on other configurations and speeds.
DataGenConfig test_data() {
  DataGenConfig c = training_data(4);
  c.speeds = {0.5, 0.85};
  c.seed = 2;
  c.noise_free = true;
  return c;
}

struct RankingArtifacts {
  std::optional<ModelSuite> h1;
};

void model_ranking(Outcome& o, RankingArtifacts& keep_out) {
  const json config = default_config();
  const RobotModel robot = robot_from_config(config);
  const PlantConfig plant = plant_from_config(config, robot);
  const GeneratedData small = generate_data(robot, plant, training_data(7));
  const GeneratedData large = generate_data(robot, plant, training_data(13));
  const GeneratedData test = generate_data(robot, plant, test_data());
  const auto groups = groups_from_json(config["train"]["groups"]);
  const HybridTrainOptions opts = train_options_from_json(config["train"]);
  const LossParams loss = identify_loss_params(small.logs, robot);

  const auto fit = [&](Composition c, const GeneratedData& d) { return train_suite(c, groups, d.logs, robot, loss, opts); };
  const auto score = [&](const std::string& name, const ModelSuite& s) { return evaluate_suite(name, s, test.logs).mean; };
  const double p1 = score("P1", fit(Composition::P1, small));
  const double p2 = score("P2", fit(Composition::P2, small));
  ModelSuite h1 = fit(Composition::H1, small);
  const double h = score("H1", h1);
  const double d_small = score("D", fit(Composition::D, small));
  const double d_large = score("D", fit(Composition::D, large));
  keep_out.h1 = std::move(h1);

  o.detail << "RMSE N m on " << test.logs.size() << " held-out legs: P1 " << p1 << ", P2 " << p2 << ", H1 " << h
           << " (H1/P2 " << h / p2 << "; " << small.samples() << " samples); D " << d_small << " at "
           << small.samples() << " vs " << d_large << " at " << large.samples() << " samples";
  o.check(p1 > p2 && p2 > h, "P1 > P2 > H1");
  o.check(h <= 0.5 * p2, "H1 <= 0.5 P2");
  o.check(d_large < d_small, "D improves with more data");
}

// ---------------------------------------------------------------- 5 grid search

void grid_search(Outcome& o) {
  HyperSpace space;
  space.names = {"max_depth", "learning_rate", "reg_lambda", "min_child_weight"};
  space.values = {{2, 3, 4, 5, 6, 7}, {0.05, 0.1, 0.2, 0.3}, {0.0, 0.5, 1.0, 2.0, 4.0}, {1, 5, 10}};
  space.passes = 1;
  int calls = 0;
  const auto f = [&](const GbtHyperParams& p) {
    ++calls;
    return std::pow(p.max_depth - 5.0, 2) + 10.0 * std::abs(p.learning_rate - 0.2) + std::pow(p.reg_lambda - 1.0, 2) +
           0.1 * std::abs(p.min_child_weight - 5.0);
  };
  // Brute force over the full product for the global grid optimum.
  double global = std::numeric_limits<double>::infinity();
  GbtHyperParams probe;
  for (double a : space.values[0])
    for (double b : space.values[1])
      for (double c : space.values[2])
        for (double d : space.values[3]) {
          probe.max_depth = static_cast<int>(a);
          probe.learning_rate = b;
          probe.reg_lambda = c;
          probe.min_child_weight = d;
          global = std::min(global, f(probe));
        }
  GbtHyperParams initial;
  initial.max_depth = 7;
  initial.learning_rate = 0.05;
  initial.reg_lambda = 4.0;
  initial.min_child_weight = 1.0;
  const double start = f(initial);
  calls = 0;
  const SearchResult r = coordinate_grid_search(space, f, initial);
  std::size_t expected = 0;
  for (const auto& v : space.values) expected += v.size();
  expected *= static_cast<std::size_t>(space.passes);

  // Three passes on a coupled objective still never end above the start.
  space.passes = 3;
  int worse = 0;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const auto coupled = [a](const GbtHyperParams& p) {
      return std::sin(a * p.max_depth * p.learning_rate * 10.0) + std::cos(p.reg_lambda * a + p.min_child_weight);
    };
    worse += coordinate_grid_search(space, coupled, initial).best_score > coupled(initial);
  }

  o.detail << "one pass best " << r.best_score << " (grid optimum " << global << "), " << calls
           << " evaluations (expected " << expected << "), start " << start << ", coupled runs ending worse " << worse;
  o.check(r.best_score == global, "global optimum in one pass");
  o.check(static_cast<std::size_t>(calls) == expected && r.trace.size() == expected, "evaluation count");
  o.check(r.best_score <= start && worse == 0, "never above the initial objective");
}

// ---------------------------------------------------------------- 6 observer

// P2 over every joint: the exact free-motion model of a zero-residual plant.
ModelSuite exact_suite(const PlantConfig& plant) {
  ModelSuite s;
  for (ChannelGroup g : {ChannelGroup::Joints123, ChannelGroup::Joint4, ChannelGroup::Joint5, ChannelGroup::Joint6}) {
    s.members.push_back(train_hybrid(Composition::P2, g, {}, plant.model, plant.true_loss, {}));
  }
  return s;
}

void observer(Outcome& o) {
  PlantConfig plant = ideal_plant();
  plant.torque_noise_std = Eigen::VectorXd::Constant(6, 0.1);
  const ModelSuite suite = exact_suite(plant);
  const Eigen::VectorXd pose = reference_campaign().center;
  const JointTrajectory hold = JointTrajectory::stationary(pose, 1001, 0.008);

  // White noise only: calibrate, then compare variances on a fresh run.
  const Eigen::MatrixXd calib = external_torque_raw(suite, simulate_tracking(plant, hold, nullptr, 11));
  const ObserverConfig cfg = calibrate_observer(calib, 0.01);
  const ObserverRun quiet = observe_log(suite, cfg, simulate_tracking(plant, hold, nullptr, 12));
  const Eigen::Index settle = 200;
  const Eigen::Index tail = quiet.raw.cols() - settle;
  const auto variance = [](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd mean = m.rowwise().mean();
    return Eigen::VectorXd(((m.colwise() - mean).array().square().rowwise().sum() / (m.cols() - 1)).matrix());
  };
  const Eigen::VectorXd var_raw = variance(quiet.raw.rightCols(tail));
  const Eigen::VectorXd var_kf = variance(quiet.filtered.rightCols(tail));
  const double var_ratio = (var_kf.array() / var_raw.array()).maxCoeff();

  // Step wrench: compare the settled filtered estimate against the truth.
  Vector6d w;
  w << 6.0, -8.0, 35.0, 1.2, -1.5, 0.6;
  WrenchProfile step;
  step.schedule.push_back({1.0, 8.0, w});
  const TrajectoryLog log = simulate_tracking(plant, hold, &step, 13);
  const ObserverRun run = observe_log(suite, cfg, log);
  const Eigen::Index from = static_cast<Eigen::Index>(1.0 / 0.008) + 4 * kalman_settle_steps(cfg.q[0], cfg.r[0], 0.95);
  const Eigen::Index count = log.n_samples() - from;
  const Eigen::VectorXd est = run.filtered.rightCols(count).rowwise().mean();
  const Eigen::VectorXd truth = log.tau_external_true.rightCols(count).rowwise().mean();
  double step_err = 0.0;
  for (int j = 0; j < 6; ++j) {
    if (std::abs(truth[j]) >= 0.5) step_err = std::max(step_err, std::abs(est[j] / truth[j] - 1.0));
  }

  const RobotModel robot = reference_robot();
  std::mt19937_64 rng(6);
  double jac_gap = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd q = pose + uniform(rng, 6, -0.4, 0.4);
    const Vector6d w0 = uniform(rng, 6, -25.0, 25.0);
    const Eigen::VectorXd tau = geometric_jacobian(robot, q).transpose() * w0;
    jac_gap = std::max(jac_gap, (wrench_from_jacobian(robot, q, tau).wrench - w0).cwiseAbs().maxCoeff());
  }

  o.detail << "step worst relative error " << 100.0 * step_err << "%, KF/raw variance worst ratio " << var_ratio
           << ", Jacobian wrench gap " << jac_gap;
  o.check(step_err <= 0.05, "step within 5%");
  o.check(var_ratio < 1.0, "filtered variance below raw");
  o.check(jac_gap < 1e-8, "Jacobian wrench within 1e-8");
}

// ---------------------------------------------------------------- 7 virtual sensor

void virtual_sensor(Outcome& o) {
  const json config = default_config();
  const RobotModel robot = robot_from_config(config);
  const WrenchStudy s = run_wrench_study(plant_from_config(config, robot), WrenchStudyConfig::from_json(config["wrench"]));
  const double limit = 0.1 * s.fz_range;
  o.detail << "F_Z MAE windowed " << s.mae_windowed[0] << " N, instantaneous " << s.mae_instantaneous[0]
           << " N, Jacobian " << s.mae_analytic[0] << " N; applied range " << s.fz_range << " N";
  o.check(s.mae_windowed[0] < limit, "MAE below 10% of range");
  o.check(s.mae_windowed[0] <= s.mae_instantaneous[0], "windowed <= instantaneous");
}

// ---------------------------------------------------------------- 8 peg in hole

void peg_in_hole(Outcome& o) {
  const json config = default_config();
  const PegEpisodeConfig cfg = peg_config_from_json(config["peg"]);
  const PegBatch batch = run_peg_batch(cfg, 100, config["peg"]["seed"].get<std::uint64_t>(), false);

  // The controller sees estimates only: replay them with the truth scrambled.
  PegEpisodeResult run = run_peg_episode(cfg, 8);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> junk(0.0, 100.0);
  for (PegStepRecord& r : run.records) {
    r.truth.force = {junk(rng), junk(rng), junk(rng)};
    r.truth.moment = {junk(rng), junk(rng), junk(rng)};
    r.pose.tip = {junk(rng), junk(rng), junk(rng)};
  }
  PegController replay(cfg.controller, run.initial);
  std::size_t agree = 0;
  for (const PegStepRecord& r : run.records) {
    const PegCommand c = replay.step(r.estimate);
    agree += c.action == r.command.action && c.translation == r.command.translation &&
             c.rotation == r.command.rotation;
  }
  int longest = 0;
  for (const auto& e : batch.episodes) longest = std::max(longest, e.steps);

  const PegHoleScene& sc = cfg.scene;
  o.detail << batch.successes << "/100 inserted (longest " << longest << " steps), replay agreement " << agree << "/"
           << run.records.size();
  o.check(sc.hole_diameter == 0.0218 && sc.hole_depth == 0.030 && sc.peg_diameter == 0.0214, "scene dimensions");
  o.check(sc.max_offset <= 0.002 && sc.max_tilt <= 2.0 * std::numbers::pi / 180.0 + 1e-12, "start bounds");
  o.check(cfg.max_steps <= 5000, "step cap");
  o.check(batch.success_rate() >= 0.9, "success rate >= 90%");
  o.check(agree == run.records.size() && !run.records.empty(), "commands depend on estimates only");
}

// ---------------------------------------------------------------- 9 wiping

void wiping(Outcome& o) {
  const json w = default_config()["wipe"];
  const WipeConfig cfg = wipe_config_from_json(w);
  const WipeRun run = run_wipe(cfg, w["seed"].get<std::uint64_t>());
  const double from = w["settle_time"].get<double>();
  const double band = w["band_fraction"].get<double>() * cfg.target_fz;
  const double mae = wipe_force_mae(run, cfg.target_fz, from);
  o.detail << "setpoint " << cfg.target_fz << " N, mean |error| " << mae << " N from t = " << from << " s (band "
           << band << " N, ramp " << 1000.0 * cfg.surface.ramp_height << " mm)";
  o.check(mae < band, "MAE below band");
}

// ---------------------------------------------------------------- 10 speed planning

void speed_planning(Outcome& o, const RankingArtifacts& from_ranking) {
  if (!from_ranking.h1) {
    o.check(false, "needs the H1 model from the ranking criterion");
    return;
  }
  const ModelSuite& model = *from_ranking.h1;
  const SpeedBenchmark bench = reference_speed_benchmark();
  PlannerOptions opts;
  PlantConfig truth = reference_plant();
  truth.torque_noise_std.setZero();
  const std::vector<PlanRow> rows = run_plan_benchmark(model, bench, opts, truth);
  double mean = 0.0;
  int violations = 0;
  for (const PlanRow& r : rows) {
    mean += r.result.reduction_fraction() / static_cast<double>(rows.size());
    const Eigen::VectorXd peak = peak_torque(model, r.result.plan);
    violations += !within_limits(peak, bench.reward.tau_limit);
    violations += !within_limits(r.result.peak_after, bench.reward.tau_limit);
    o.detail << r.name << " " << 100.0 * r.result.reduction_fraction() << "%, ";
  }
  o.detail << "mean " << 100.0 * mean << "%, violations " << violations;
  o.check(mean >= 0.15, "mean reduction >= 15%");
  o.check(violations == 0, "no torque-limit violations");
}

// ---------------------------------------------------------------- 11 determinism

void determinism(Outcome& o) {
  const json c = load_config(
      "", {"data.keep=3", "data.speeds=[1.0]", "data.range_fraction=0.3", "train.gbt.n_estimators=10",
           "train.window_len=2", "train.compositions=[\"P2\",\"H1\"]", "eval.data=train",
           "eval.compositions=[\"P2\",\"H1\"]", "observe.model=H1", R"(grid_search.space={"max_depth":[2,3]})",
           "grid_search.composition=H1", "wrench.poses=3", "wrench.train_campaigns=2", "wrench.free_campaigns=1",
           "wrench.free_poses=4", "wrench.gbt.n_estimators=10", "peg.episodes=3", "peg.min_success_rate=0",
           "wipe.steps=1000", "plan.budget=32"});
  const std::vector<std::string>& stages = subcommand_names();
  std::vector<std::string> digest[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = fs::temp_directory_path() / ("hdyn_acceptance_rerun" + std::to_string(run));
    fs::remove_all(dir);
    for (const std::string& stage : stages) digest[run].push_back(run_stage(stage, c, dir).manifest.digest());
    fs::remove_all(dir);
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (digest[0][i] == digest[1][i]) {
      ++same;
    } else {
      o.detail << stages[i] << " differs; ";
    }
  }
  o.detail << same << "/" << stages.size() << " stage manifests identical on rerun";
  o.check(same == stages.size(), "bit-reproducible stages");
}

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0: none stated
  std::function<void(Outcome&)> body;
};

}  // namespace
}  // namespace hdyn

int main() {
  using namespace hdyn;
  RankingArtifacts ranking;
  const std::vector<Criterion> criteria{
      {1, "dynamics correctness", 10.0, dynamics_correctness},
      {2, "loss identification", 30.0, loss_identification},
      {3, "boosting correctness", 60.0, boosting_correctness},
      {4, "model ranking", 900.0, [&](Outcome& o) { model_ranking(o, ranking); }},
      {5, "coordinate grid search", 0.0, grid_search},
      {6, "observer", 0.0, observer},
      {7, "virtual force sensor", 0.0, virtual_sensor},
      {8, "peg in hole", 300.0, peg_in_hole},
      {9, "wiping", 0.0, wiping},
      {10, "speed planning", 600.0, [&](Outcome& o) { speed_planning(o, ranking); }},
      {11, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0) o.check(secs < c.time_limit_s, "runtime limit");
    failed += !o.pass;
    std::printf("%s %2d %-24s %7.1f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
