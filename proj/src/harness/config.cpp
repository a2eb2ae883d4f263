#include "hdyn/harness/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

using nlohmann::json;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string p;
  while (std::getline(ss, p, '.')) parts.push_back(p);
  return parts;
}

json::json_pointer pointer(const std::string& path) {
  std::string s;
  for (const auto& p : split_path(path)) s += "/" + p;
  return json::json_pointer(s);
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

bool is_schema_key(const std::string& path);

// Walks the user object; every leaf must exist in the defaults with the same kind.
void merge_checked(json& target, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config: expected an object at '" + prefix + "'");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!target.contains(it.key())) throw ConfigError("config: unknown key '" + path + "'");
    json& slot = target[it.key()];
    if (slot.is_object() && !is_schema_key(path)) {
      merge_checked(slot, it.value(), path);
    } else {
      if (!same_kind(slot, it.value()))
        throw ConfigError("config: '" + path + "' expects " + std::string(slot.type_name()) + ", got " +
                          std::string(it.value().type_name()));
      slot = it.value();
    }
  }
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"robot.file", "path", "", "robot description JSON; empty uses the bundled reference arm"},
      {"plant.residual", "bool", true, "inject the reference un-modelled joint effects"},
      {"plant.noise_std", "N m", 0.1, "torque measurement noise, every joint"},

      {"data.name", "-", "train", "dataset directory name under the output directory"},
      {"data.range_fraction", "-", 0.5, "fraction of each joint range the grid spans, centred"},
      {"data.segments", "count/joint", json::array({2, 2, 2, 1, 1, 1}), "grid segments per joint"},
      {"data.speeds", "-", json::array({0.6, 1.0}), "speed factors applied to v_max"},
      {"data.keep", "count", 7, "collision-free configurations kept"},
      {"data.pair_mode", "-", "ordered", "ordered or unordered configuration pairs"},
      {"data.seed", "-", 1, "configuration draw and plant noise seed"},
      {"data.noise_free", "bool", false, "disable torque noise for this dataset (evaluation sets)"},

      {"identify.data", "-", "train", "dataset the loss parameters are fitted on"},

      {"train.data", "-", "train", "training dataset"},
      {"train.compositions", "-", json::array({"P1", "P2", "H1"}), "models to train (P1 P2 D H1 H2 H3)"},
      {"train.groups", "-", json::array({"joints123", "joint4", "joint5", "joint6"}), "channel groups"},
      {"train.window_len", "samples", 5, "feature window"},
      {"train.normalize", "bool", false, "standardise tree features"},
      {"train.gbt.learning_rate", "-", 0.1, "shrinkage per tree"},
      {"train.gbt.max_depth", "levels", 5, "tree depth"},
      {"train.gbt.min_child_weight", "-", 20.0, "minimum hessian sum per leaf"},
      {"train.gbt.colsample_bytree", "-", 0.6, "feature fraction per tree"},
      {"train.gbt.subsample", "-", 1.0, "row fraction per tree"},
      {"train.gbt.reg_alpha", "-", 0.0, "L1 leaf penalty"},
      {"train.gbt.reg_lambda", "-", 1.0, "L2 leaf penalty"},
      {"train.gbt.gamma", "-", 0.0, "minimum split gain"},
      {"train.gbt.n_estimators", "trees", 200, "boosting rounds"},
      {"train.gbt.seed", "-", 0, "column and row sampling seed"},

      {"grid_search.group", "-", "joints123", "channel group tuned"},
      {"grid_search.composition", "-", "H1", "composition tuned"},
      {"grid_search.train_fraction", "-", 0.8, "leading share of trajectories used for fitting"},
      {"grid_search.passes", "count", 1, "sweeps over all parameters"},
      {"grid_search.space", "-",
       json{{"max_depth", {3, 5, 7}}, {"learning_rate", {0.05, 0.1, 0.2}}, {"n_estimators", {100, 200}}},
       "candidate lists per hyperparameter"},

      {"eval.data", "-", "test", "evaluation dataset"},
      {"eval.compositions", "-", json::array({"P1", "P2", "H1"}), "trained models to score"},

      {"observe.model", "-", "P2", "free-motion model used to predict torque"},
      {"observe.q_ratio", "-", 0.01, "process noise as a fraction of the calibrated r"},
      {"observe.seed", "-", 7, "campaign seed"},
      {"observe.fz_max", "N", 40.0, "largest applied F_Z"},
      {"observe.moment_max", "N m", 3.0, "largest applied |M_X|, |M_Y|"},

      {"wrench.spread_scale", "-", 0.5, "scale on the campaign pose spread"},
      {"wrench.wrench_hold", "s", 1.0, "time per wrench level"},
      {"wrench.poses", "count", 12, "poses per campaign"},
      {"wrench.train_campaigns", "count", 30, "campaigns for the wrench maps"},
      {"wrench.free_campaigns", "count", 4, "zero-wrench campaigns for the free model"},
      {"wrench.free_poses", "count", 20, "poses per zero-wrench campaign"},
      {"wrench.window_len", "samples", 5, "wrench feature window"},
      {"wrench.q_ratio", "-", 0.01, "observer process noise ratio"},
      {"wrench.seed", "-", 100, "base campaign seed"},
      {"wrench.gbt.max_depth", "levels", 6, "tree depth"},
      {"wrench.gbt.n_estimators", "trees", 150, "boosting rounds"},
      {"wrench.gbt.learning_rate", "-", 0.1, "shrinkage per tree"},
      {"wrench.gbt.colsample_bytree", "-", 0.6, "feature fraction per tree"},
      {"wrench.gbt.min_child_weight", "-", 20.0, "minimum hessian sum per leaf"},

      {"peg.episodes", "count", 100, "seeded episodes"},
      {"peg.seed", "-", 0, "seed of the first episode"},
      {"peg.max_steps", "steps", 5000, "step budget per episode"},
      {"peg.max_offset", "m", 0.002, "largest initial lateral offset"},
      {"peg.max_tilt_deg", "deg", 2.0, "largest initial tilt"},
      {"peg.min_success_rate", "-", 0.9, "below this the subcommand exits with 4"},
      {"peg.record", "bool", false, "write a step CSV per episode"},

      {"wipe.target_fz", "N", 60.0, "pressing force setpoint"},
      {"wipe.gain", "m/N", 2e-6, "force error to displacement gain"},
      {"wipe.steps", "steps", 5000, "control steps"},
      {"wipe.ramp_height", "m", 0.002, "surface rise along the stroke"},
      {"wipe.band_fraction", "-", 0.1, "allowed steady error as a fraction of the setpoint"},
      {"wipe.settle_time", "s", 5.0, "error is averaged from this time on"},
      {"wipe.seed", "-", 0, "sensor noise seed"},

      {"plan.input", "path", "", "JSON with trajectories and reward; empty uses the bundled benchmark"},
      {"plan.model", "-", "physics", "physics (reference arm, P2) or a trained composition name"},
      {"plan.budget", "evaluations", 320, "model evaluations per trajectory"},
      {"plan.seed", "-", 0, "search seed"},
  };
  return keys;
}

namespace {
bool is_schema_key(const std::string& path) {
  for (const auto& k : config_schema())
    if (k.path == path) return true;
  return false;
}
}  // namespace

json default_config() {
  json out = json::object();
  for (const auto& k : config_schema()) out[pointer(k.path)] = k.default_value;
  return out;
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"gen-data", "identify", "train", "grid-search", "eval",
                                                 "observe",  "wrench-train", "peg", "wipe", "plan"};
  return names;
}

std::vector<std::string> subcommand_sections(const std::string& s) {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"gen-data", {"robot", "plant", "data"}},
      {"identify", {"robot", "identify"}},
      {"train", {"robot", "train"}},
      {"grid-search", {"robot", "train", "grid_search"}},
      {"eval", {"eval"}},
      {"observe", {"robot", "plant", "observe"}},
      {"wrench-train", {"robot", "plant", "wrench"}},
      {"peg", {"peg"}},
      {"wipe", {"wipe"}},
      {"plan", {"robot", "plan"}},
  };
  const auto it = m.find(s);
  if (it == m.end()) throw ConfigError("unknown subcommand '" + s + "'");
  return it->second;
}

std::string subcommand_summary(const std::string& s) {
  static const std::map<std::string, std::string> m = {
      {"gen-data", "collision-free grid, leg chain, plant tracking -> logged dataset"},
      {"identify", "fit loss parameters (B_m, C_m, f_c) on a dataset"},
      {"train", "train model suites per composition"},
      {"grid-search", "coordinate grid search over tree hyperparameters"},
      {"eval", "per-trajectory RMSE report of trained models"},
      {"observe", "streaming external-torque observer on a wrench campaign"},
      {"wrench-train", "train virtual wrench maps and report held-out MAE"},
      {"peg", "seeded peg-in-hole episodes and a summary"},
      {"wipe", "force-tracking wipe over a ramped surface"},
      {"plan", "duration optimisation of start-via-end trajectories"},
  };
  const auto it = m.find(s);
  if (it == m.end()) throw ConfigError("unknown subcommand '" + s + "'");
  return it->second;
}

std::string format_schema(const std::vector<std::string>& sections) {
  std::ostringstream out;
  out << "config keys (override with --set key=value):\n";
  for (const auto& k : config_schema()) {
    const std::string section = split_path(k.path).front();
    bool wanted = false;
    for (const auto& s : sections) wanted = wanted || s == section;
    if (!wanted) continue;
    out << "  " << k.path << " [" << k.unit << "] = " << k.default_value.dump() << "\n      " << k.help << "\n";
  }
  return out.str();
}

json load_config(const std::string& file, const std::vector<std::string>& overrides) {
  json config = default_config();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config: cannot open '" + file + "'");
    json user;
    try {
      in >> user;
    } catch (const json::exception& e) {
      throw ConfigError("config: cannot parse '" + file + "': " + e.what());
    }
    merge_checked(config, user, "");
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json patch = json::object();
    patch[pointer(key)] = value;
    merge_checked(config, patch, "");
  }
  return config;
}

const json& config_at(const json& config, const std::string& path) {
  const auto p = pointer(path);
  if (!config.contains(p)) throw ConfigError("config: missing key '" + path + "'");
  return config.at(p);
}

}  // namespace hdyn
