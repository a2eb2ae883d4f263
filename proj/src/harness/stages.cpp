#include "hdyn/harness/stages.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/robot_config.hpp"
#include "hdyn/harness/config.hpp"
#include "hdyn/harness/experiments.hpp"
#include "hdyn/learn/grid_search.hpp"
#include "hdyn/learn/identify.hpp"

namespace hdyn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Stage {
  const json& config;
  fs::path out;
  StageResult result;

  Stage(const std::string& name, const json& c, fs::path o) : config(c), out(std::move(o)) {
    result.manifest.subcommand = name;
    json used = json::object();
    for (const auto& s : subcommand_sections(name)) used[s] = c.at(s);
    result.manifest.config = used;
  }

  const json& at(const std::string& path) const { return config_at(config, path); }

  void write_text(const std::string& rel, const std::string& text) {
    fs::create_directories((out / rel).parent_path());
    std::ofstream f(out / rel, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (out / rel).string() + "'");
    f << text;
    f.close();
    result.manifest.add_output(out, rel);
  }
  void write_json(const std::string& rel, const json& j) { write_text(rel, j.dump(2) + "\n"); }

  json read_json(const std::string& rel, const std::string& producer) {
    std::ifstream f(out / rel);
    if (!f) throw MissingArtifact((out / rel).string(), producer);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse '" + (out / rel).string() + "': " + e.what());
    }
    result.manifest.add_input(out, rel);
    return j;
  }

  std::vector<TrajectoryLog> read_dataset(const std::string& name) {
    const json index = read_json(name + "/dataset.json", "gen-data");
    std::vector<TrajectoryLog> logs;
    for (const auto& leg : index.at("legs")) {
      const std::string rel = name + "/" + leg.at("file").get<std::string>();
      if (!fs::exists(out / rel)) throw MissingArtifact((out / rel).string(), "gen-data");
      logs.push_back(read_log_csv((out / rel).string()));
      result.manifest.add_input(out, rel);
    }
    return logs;
  }

  LossParams read_loss() { return loss_from_json(read_json("loss.json", "identify")); }

  ModelSuite read_model(const std::string& composition) {
    composition_from_string(composition);  // rejects unknown names
    return suite_from_json(read_json("models/" + composition + ".json", "train"));
  }
};

std::string format_vector(const Eigen::VectorXd& v, int precision = 4) {
  std::ostringstream o;
  o << std::setprecision(precision);
  for (Eigen::Index i = 0; i < v.size(); ++i) o << (i ? " " : "") << v[i];
  return o.str();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string trajectory_csv(const JointTrajectory& t) {
  std::ostringstream o;
  const Eigen::Index n = t.theta.rows();
  o << "t";
  for (const char* p : {"theta_", "thetad_", "thetadd_"})
    for (Eigen::Index j = 1; j <= n; ++j) o << "," << p << j;
  o << "\n";
  char buf[40];
  for (Eigen::Index k = 0; k < t.n_samples(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(k) * t.sample_period);
    o << buf;
    for (const Eigen::MatrixXd* m : {&t.theta, &t.theta_dot, &t.theta_ddot})
      for (Eigen::Index j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof buf, ",%.17g", (*m)(j, k));
        o << buf;
      }
    o << "\n";
  }
  return o.str();
}

// ---------------------------------------------------------------- stages

void gen_data(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const PlantConfig plant = plant_from_config(s.config, robot);
  const DataGenConfig cfg = DataGenConfig::from_json(s.at("data"));
  const std::string name = s.at("data.name").get<std::string>();
  require(!name.empty() && name.find('/') == std::string::npos, "data.name must be a plain directory name");
  const GeneratedData data = generate_data(robot, plant, cfg);

  json legs = json::array();
  for (std::size_t k = 0; k < data.logs.size(); ++k) {
    char file[32];
    std::snprintf(file, sizeof file, "leg_%04zu.csv", k);
    std::ostringstream csv;
    write_log_csv(data.logs[k], csv);
    s.write_text(name + "/" + file, csv.str());
    const Leg& leg = data.set.legs[k];
    legs.push_back({{"file", file},
                    {"from", leg.from},
                    {"to", leg.to},
                    {"speed", leg.speed},
                    {"transfer", leg.transfer},
                    {"samples", data.logs[k].n_samples()}});
  }
  json configs = json::array();
  for (const auto& c : data.set.configs) configs.push_back(to_std(c));
  s.write_json(name + "/dataset.json", {{"configs", configs}, {"legs", legs}, {"samples", data.samples()}});
  s.result.manifest.tag = name;
  s.result.manifest.seeds = {cfg.seed};
  s.result.manifest.stages = {"gen-data"};
  std::ostringstream r;
  r << name << ": " << data.set.configs.size() << " configurations, " << data.set.pair_legs() << " pair legs ("
    << data.logs.size() << " total), " << data.samples() << " samples\n";
  s.result.report = r.str();
}

void identify(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const auto logs = s.read_dataset(s.at("identify.data").get<std::string>());
  const LossParams loss = identify_loss_params(logs, robot);
  s.write_json("loss.json", loss_to_json(loss));
  s.result.manifest.stages = {"gen-data", "identify"};
  s.result.report = "b_m [N m s^2/rad]: " + format_vector(loss.b_m) + "\nc_m [N m s/rad]:   " +
                    format_vector(loss.c_m) + "\nf_c [N m]:         " + format_vector(loss.f_c) + "\n";
}

void train(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const auto logs = s.read_dataset(s.at("train.data").get<std::string>());
  const HybridTrainOptions options = train_options_from_json(s.at("train"));
  const auto groups = groups_from_json(s.at("train.groups"));
  std::vector<Composition> comps;
  bool need_loss = false;
  for (const auto& c : s.at("train.compositions")) {
    comps.push_back(composition_from_string(c.get<std::string>()));
    need_loss = need_loss || parts(comps.back()).loss;
  }
  const LossParams loss = need_loss ? s.read_loss() : LossParams::zeros(robot.joint_limits.size());
  std::ostringstream r;
  for (Composition c : comps) {
    const ModelSuite suite = train_suite(c, groups, logs, robot, loss, options);
    s.write_json("models/" + to_string(c) + ".json", to_json(suite));
    r << to_string(c) << ": " << suite.members.size() << " group models, window " << suite.max_window() << "\n";
  }
  s.result.manifest.seeds = {options.params.seed};
  s.result.manifest.stages = {"gen-data", "identify", "train"};
  s.result.report = r.str();
}

void grid_search(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const auto logs = s.read_dataset(s.at("train.data").get<std::string>());
  const HybridTrainOptions base = train_options_from_json(s.at("train"));
  const Composition comp = composition_from_string(s.at("grid_search.composition").get<std::string>());
  const ChannelGroup group = group_from_string(s.at("grid_search.group").get<std::string>());
  std::optional<LossParams> loss;
  if (parts(comp).loss) loss = s.read_loss();
  std::optional<RobotModel> physics;
  if (parts(comp).eom) physics = robot;

  HyperSpace space;
  for (const auto& [name, values] : s.at("grid_search.space").items()) {
    space.names.push_back(name);
    space.values.push_back(values.get<std::vector<double>>());
  }
  space.passes = s.at("grid_search.passes").get<int>();
  space.validate();
  const LogSplit split = split_blocks(logs, s.at("grid_search.train_fraction").get<double>());

  const Objective objective = [&](const GbtHyperParams& p) {
    HybridTrainOptions o = base;
    o.params = p;
    const HybridModel m = train_hybrid(comp, group, split.train, physics, loss, o);
    return evaluate_models({m}, {"candidate"}, split.validation).front().mean;
  };
  const SearchResult res = coordinate_grid_search(space, objective, base.params);
  json trace = json::array();
  for (const auto& t : res.trace) trace.push_back({{"pass", t.pass}, {"name", t.name}, {"value", t.value}, {"score", t.score}});
  s.write_json("grid_search.json", {{"best", to_json(res.best)}, {"best_score", res.best_score}, {"trace", trace}});
  s.result.manifest.seeds = {base.params.seed};
  s.result.manifest.stages = {"gen-data", "grid-search"};
  std::ostringstream r;
  r << "best validation RMSE " << res.best_score << " N m after " << res.trace.size() << " evaluations\n";
  for (const auto& n : space.names) r << "  " << n << " = " << get_hyperparam(res.best, n) << "\n";
  s.result.report = r.str();
}

void eval(Stage& s) {
  const auto logs = s.read_dataset(s.at("eval.data").get<std::string>());
  std::vector<ModelStats> stats;
  for (const auto& c : s.at("eval.compositions")) {
    const std::string name = c.get<std::string>();
    stats.push_back(evaluate_suite(name, s.read_model(name), logs));
  }
  std::ostringstream csv;
  write_report_csv(stats, csv);
  s.write_text("report.csv", csv.str());
  const std::string table = format_report_table(stats);
  s.write_text("report.txt", table);
  s.result.manifest.stages = {"gen-data", "identify", "train", "eval"};
  s.result.report = "per-trajectory RMSE over all joints [N m]\n" + table;
}

void observe(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const PlantConfig plant = plant_from_config(s.config, robot);
  const ModelSuite model = s.read_model(s.at("observe.model").get<std::string>());
  const auto seed = s.at("observe.seed").get<std::uint64_t>();
  CampaignSpec spec = reference_campaign();
  spec.fz_max = s.at("observe.fz_max").get<double>();
  spec.moment_max = s.at("observe.moment_max").get<double>();
  CampaignSpec quiet = spec;
  quiet.zero_wrench = true;

  const MotionLimits limits = reference_motion_limits();
  const WrenchCampaign zc = make_wrench_campaign(quiet, limits, seed + 1);
  const TrajectoryLog zlog = simulate_tracking(plant, zc.reference, nullptr, seed + 1);
  const ObserverConfig cfg = calibrate_observer(external_torque_raw(model, zlog), s.at("observe.q_ratio").get<double>());

  const WrenchCampaign c = make_wrench_campaign(spec, limits, seed);
  const TrajectoryLog log = simulate_tracking(plant, c.reference, &c.wrench, seed);
  StreamingObserver obs(model, cfg);
  ObserverRun run;
  run.times = log.times;
  run.raw = Eigen::MatrixXd::Constant(log.n_joints(), log.n_samples(), std::numeric_limits<double>::quiet_NaN());
  run.filtered = run.raw;
  for (Eigen::Index k = 0; k < log.n_samples(); ++k) {
    if (obs.push(log.times[k], log.theta.col(k), log.theta_dot.col(k), log.theta_ddot.col(k), log.tau_measured.col(k))) {
      run.raw.col(k) = obs.raw();
      run.filtered.col(k) = obs.filtered();
    }
  }
  const Eigen::MatrixXd wrench3 = log.wrench_true.middleRows(2, 3);
  std::ostringstream csv;
  write_observer_csv(run, &wrench3, csv);
  s.write_text("observe/observer.csv", csv.str());

  // Settled samples: no wrench change within the filter's 5% settling time.
  int settle = 1;
  for (Eigen::Index j = 0; j < cfg.q.size(); ++j) settle = std::max(settle, kalman_settle_steps(cfg.q[j], cfg.r[j], 0.95));
  const Eigen::Index n_joints = log.n_joints();
  Eigen::VectorXd raw_all = Eigen::VectorXd::Zero(n_joints), hat_all = raw_all, raw_set = raw_all, hat_set = raw_all;
  Eigen::Index n_all = 0, n_set = 0, since_change = 0;
  for (Eigen::Index k = 0; k < log.n_samples(); ++k) {
    since_change = (k > 0 && log.wrench_true.col(k) != log.wrench_true.col(k - 1)) ? 0 : since_change + 1;
    if (!run.filtered.col(k).allFinite()) continue;
    const Eigen::VectorXd er = (run.raw.col(k) - log.tau_external_true.col(k)).cwiseAbs2();
    const Eigen::VectorXd ef = (run.filtered.col(k) - log.tau_external_true.col(k)).cwiseAbs2();
    raw_all += er;
    hat_all += ef;
    ++n_all;
    if (since_change >= settle) {
      raw_set += er;
      hat_set += ef;
      ++n_set;
    }
  }
  const auto rms = [](const Eigen::VectorXd& sum, Eigen::Index n) -> Eigen::VectorXd {
    return (sum / static_cast<double>(std::max<Eigen::Index>(n, 1))).cwiseSqrt();
  };
  s.write_json("observe/summary.json", {{"samples", n_all},
                                        {"settled_samples", n_set},
                                        {"settle_steps", settle},
                                        {"rmse_raw", to_std(rms(raw_all, n_all))},
                                        {"rmse_filtered", to_std(rms(hat_all, n_all))},
                                        {"rmse_raw_settled", to_std(rms(raw_set, n_set))},
                                        {"rmse_filtered_settled", to_std(rms(hat_set, n_set))},
                                        {"r", to_std(cfg.r)},
                                        {"q", to_std(cfg.q)}});
  s.result.manifest.seeds = {seed};
  s.result.manifest.stages = {"gen-data", "identify", "train", "observe"};
  s.result.report = "external torque RMSE vs truth [N m], all samples\n  raw:      " +
                    format_vector(rms(raw_all, n_all)) + "\n  filtered: " + format_vector(rms(hat_all, n_all)) +
                    "\nsettled samples (" + std::to_string(settle) + " steps after each wrench change)\n  raw:      " +
                    format_vector(rms(raw_set, n_set)) + "\n  filtered: " + format_vector(rms(hat_set, n_set)) + "\n";
}

void wrench_train(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const PlantConfig plant = plant_from_config(s.config, robot);
  const WrenchStudyConfig cfg = WrenchStudyConfig::from_json(s.at("wrench"));
  const WrenchStudy study = run_wrench_study(plant, cfg);
  s.write_json("wrench/wrench_model.json", to_json(study.windowed));
  s.write_json("wrench/free_model.json", to_json(study.free_model));
  const auto v3 = [](const Eigen::Vector3d& v) { return std::vector<double>{v[0], v[1], v[2]}; };
  s.write_json("wrench/summary.json", {{"mae_windowed", v3(study.mae_windowed)},
                                       {"mae_instantaneous", v3(study.mae_instantaneous)},
                                       {"mae_analytic", v3(study.mae_analytic)},
                                       {"fz_range", study.fz_range},
                                       {"window_len", cfg.window_len}});
  s.result.manifest.seeds = {cfg.seed};
  s.result.manifest.stages = {"wrench-train"};
  std::ostringstream r;
  r << "held-out MAE (F_Z N, M_X N m, M_Y N m)\n"
    << "  window " << cfg.window_len << ": " << format_vector(study.mae_windowed) << "\n"
    << "  window 1: " << format_vector(study.mae_instantaneous) << "\n"
    << "  jacobian: " << format_vector(study.mae_analytic) << "\n"
    << "  F_Z range " << study.fz_range << " N\n";
  s.result.report = r.str();
}

void peg(Stage& s) {
  const PegEpisodeConfig cfg = peg_config_from_json(s.at("peg"));
  const int episodes = s.at("peg.episodes").get<int>();
  const auto seed = s.at("peg.seed").get<std::uint64_t>();
  const bool record = s.at("peg.record").get<bool>();
  const PegBatch batch = run_peg_batch(cfg, episodes, seed, record);
  json list = json::array();
  for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
    json j = peg_summary_json(batch.episodes[e]);
    j["seed"] = seed + e;
    list.push_back(j);
    if (record) {
      char file[40];
      std::snprintf(file, sizeof file, "peg/episode_%04zu.csv", e);
      std::ostringstream csv;
      write_peg_csv(batch.episodes[e], csv);
      s.write_text(file, csv.str());
    }
  }
  const double min_rate = s.at("peg.min_success_rate").get<double>();
  s.write_json("peg/summary.json", {{"episodes", list}, {"successes", batch.successes}, {"success_rate", batch.success_rate()}});
  s.result.manifest.seeds = {seed};
  s.result.manifest.stages = {"peg"};
  s.result.task_ok = batch.success_rate() >= min_rate;
  std::ostringstream r;
  r << batch.successes << "/" << batch.episodes.size() << " insertions (" << 100.0 * batch.success_rate()
    << "%), required " << 100.0 * min_rate << "%\n";
  s.result.report = r.str();
}

void wipe(Stage& s) {
  const WipeConfig cfg = wipe_config_from_json(s.at("wipe"));
  const auto seed = s.at("wipe.seed").get<std::uint64_t>();
  const WipeRun run = run_wipe(cfg, seed);
  const double from = s.at("wipe.settle_time").get<double>();
  const double band = s.at("wipe.band_fraction").get<double>() * cfg.target_fz;
  const double mae = wipe_force_mae(run, cfg.target_fz, from);
  const double recovery = wipe_recovery_time(run, cfg.target_fz, band, from);
  std::ostringstream csv;
  write_wipe_csv(run, csv);
  s.write_text("wipe/wipe.csv", csv.str());
  s.write_json("wipe/summary.json", {{"target_fz", cfg.target_fz}, {"mae", mae}, {"band", band}, {"recovery_time", recovery}});
  s.result.manifest.seeds = {seed};
  s.result.manifest.stages = {"wipe"};
  s.result.task_ok = mae <= band;
  std::ostringstream r;
  r << "F_Z mean |error| " << mae << " N from t = " << from << " s (band " << band << " N)\n";
  s.result.report = r.str();
}

void plan(Stage& s) {
  const RobotModel robot = robot_from_config(s.config);
  const std::string input = s.at("plan.input").get<std::string>();
  SpeedBenchmark bench;
  if (input.empty()) {
    bench = reference_speed_benchmark();
  } else {
    std::ifstream f(input);
    if (!f) throw ConfigError("plan.input: cannot open '" + input + "'");
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw ConfigError("plan.input: cannot parse '" + input + "': " + e.what());
    }
    bench = benchmark_from_json(j);
  }
  const std::string model_name = s.at("plan.model").get<std::string>();
  ModelSuite model;
  if (model_name == "physics") {
    model.fallback_robot = robot;
    model.fallback_loss = reference_loss();
  } else {
    model = s.read_model(model_name);
  }
  PlannerOptions opts;
  opts.budget = s.at("plan.budget").get<int>();
  opts.seed = s.at("plan.seed").get<std::uint64_t>();
  PlantConfig truth = reference_plant();
  truth.model = robot;
  truth.torque_noise_std.setZero();
  const auto rows = run_plan_benchmark(model, bench, opts, truth);

  json results = json::array();
  for (const auto& row : rows) {
    json j = to_json(row.result);
    j["name"] = row.name;
    j["plant_peak_before"] = to_std(row.plant_peak_before);
    j["plant_peak_after"] = to_std(row.plant_peak_after);
    results.push_back(j);
    s.write_text("plan/" + row.name + "_before.csv", trajectory_csv(row.result.baseline.sample()));
    s.write_text("plan/" + row.name + "_after.csv", trajectory_csv(row.result.plan.sample()));
  }
  s.write_json("plan/plan.json", {{"input", to_json(bench)}, {"results", results}});
  const std::string table = format_plan_table(rows);
  s.write_text("plan/report.txt", table);
  s.result.manifest.seeds = {opts.seed};
  s.result.manifest.stages = {"plan"};
  for (const auto& row : rows) s.result.task_ok = s.result.task_ok && within_limits(row.result.peak_after, bench.reward.tau_limit);
  s.result.report = table;
}

}  // namespace

StageResult run_stage(const std::string& subcommand, const json& config, const fs::path& out) {
  static const std::map<std::string, std::function<void(Stage&)>> table = {
      {"gen-data", gen_data}, {"identify", identify}, {"train", train},   {"grid-search", grid_search},
      {"eval", eval},         {"observe", observe},   {"wrench-train", wrench_train},
      {"peg", peg},           {"wipe", wipe},         {"plan", plan}};
  const auto it = table.find(subcommand);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  fs::create_directories(out);
  Stage stage(subcommand, config, out);
  it->second(stage);
  write_manifest(out, stage.result.manifest);
  return stage.result;
}

}  // namespace hdyn
