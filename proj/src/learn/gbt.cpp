#include "hdyn/learn/gbt.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

#include "hdyn/common/errors.hpp"

namespace hdyn {

void GbtHyperParams::validate() const {
  require(learning_rate > 0.0 && learning_rate <= 1.0, "gbt: learning_rate must be in (0, 1]");
  require(max_depth >= 1, "gbt: max_depth must be >= 1");
  require(min_child_weight >= 0.0, "gbt: min_child_weight must be >= 0");
  require(colsample_bytree > 0.0 && colsample_bytree <= 1.0, "gbt: colsample_bytree must be in (0, 1]");
  require(subsample > 0.0 && subsample <= 1.0, "gbt: subsample must be in (0, 1]");
  require(reg_alpha >= 0.0 && reg_lambda >= 0.0, "gbt: regularization must be >= 0");
  require(gamma >= 0.0, "gbt: gamma must be >= 0");
  require(n_estimators >= 1, "gbt: n_estimators must be >= 1");
}

nlohmann::json to_json(const GbtHyperParams& p) {
  return {{"learning_rate", p.learning_rate}, {"max_depth", p.max_depth},
          {"min_child_weight", p.min_child_weight}, {"colsample_bytree", p.colsample_bytree},
          {"subsample", p.subsample}, {"reg_alpha", p.reg_alpha}, {"reg_lambda", p.reg_lambda},
          {"gamma", p.gamma}, {"n_estimators", p.n_estimators}, {"seed", p.seed}};
}

GbtHyperParams hyperparams_from_json(const nlohmann::json& j, GbtHyperParams p) {
  for (const auto& name : hyperparam_names()) {
    if (j.contains(name)) set_hyperparam(p, name, j.at(name).get<double>());
  }
  if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
  p.validate();
  return p;
}

const std::vector<std::string>& hyperparam_names() {
  static const std::vector<std::string> names{
      "learning_rate", "max_depth", "min_child_weight", "colsample_bytree", "subsample",
      "reg_alpha",     "reg_lambda", "gamma",           "n_estimators"};
  return names;
}

void set_hyperparam(GbtHyperParams& p, const std::string& name, double value) {
  if (name == "learning_rate") p.learning_rate = value;
  else if (name == "max_depth") p.max_depth = static_cast<int>(std::lround(value));
  else if (name == "min_child_weight") p.min_child_weight = value;
  else if (name == "colsample_bytree") p.colsample_bytree = value;
  else if (name == "subsample") p.subsample = value;
  else if (name == "reg_alpha") p.reg_alpha = value;
  else if (name == "reg_lambda") p.reg_lambda = value;
  else if (name == "gamma") p.gamma = value;
  else if (name == "n_estimators") p.n_estimators = static_cast<int>(std::lround(value));
  else throw ContractError("unknown hyperparameter '" + name + "'");
}

double get_hyperparam(const GbtHyperParams& p, const std::string& name) {
  if (name == "learning_rate") return p.learning_rate;
  if (name == "max_depth") return p.max_depth;
  if (name == "min_child_weight") return p.min_child_weight;
  if (name == "colsample_bytree") return p.colsample_bytree;
  if (name == "subsample") return p.subsample;
  if (name == "reg_alpha") return p.reg_alpha;
  if (name == "reg_lambda") return p.reg_lambda;
  if (name == "gamma") return p.gamma;
  if (name == "n_estimators") return p.n_estimators;
  throw ContractError("unknown hyperparameter '" + name + "'");
}

double GbtTree::predict(const double* x, Eigen::Index stride) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    i = x[n.feature * stride] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].weight;
}

int GbtTree::depth() const {
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

double GbtEnsemble::predict_row(const double* x, Eigen::Index stride) const {
  double sum = base_score;
  for (const auto& t : trees) sum += t.predict(x, stride);
  return sum;
}

Eigen::VectorXd GbtEnsemble::predict(const Eigen::MatrixXd& x) const {
  require(x.cols() == n_features, "gbt predict: expected " + std::to_string(n_features) +
                                      " feature columns, got " + std::to_string(x.cols()));
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = predict_row(x.data() + r, x.rows());
  return out;
}

void GbtEnsemble::validate() const {
  params.validate();
  for (const auto& t : trees) {
    require(!t.nodes.empty(), "gbt: empty tree");
    for (const auto& n : t.nodes) {
      if (n.feature < 0) continue;
      require(n.feature < n_features, "gbt: split feature index out of range");
      require(n.left > 0 && n.right > 0 && static_cast<std::size_t>(n.left) < t.nodes.size() &&
                  static_cast<std::size_t>(n.right) < t.nodes.size(),
              "gbt: child index out of range");
    }
    require(t.depth() <= params.max_depth, "gbt: tree deeper than max_depth");
  }
}

namespace {

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct OpenNode {
  int id = 0;
  double g = 0.0;
  double h = 0.0;
};

// Column presorted once per training run; values stored next to row ids so the
// split scan reads them sequentially.
struct SortedColumn {
  std::vector<std::int32_t> rows;
  std::vector<double> values;
};

struct RowInfo {
  std::int32_t slot;  // open-node slot of this level, -1 when inactive
  double grad;
};

// Grows one tree on the rows with position[r] == 0 (the root); others carry -1.
GbtTree grow_tree(const Eigen::MatrixXd& x, const std::vector<SortedColumn>& sorted,
                  const std::vector<int>& features, const Eigen::VectorXd& grad,
                  std::vector<int>& position, const GbtHyperParams& p) {
  GbtTree tree;
  tree.nodes.emplace_back();
  double g0 = 0.0;
  double h0 = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (position[static_cast<std::size_t>(r)] == 0) {
      g0 += grad[r];
      h0 += 1.0;
    }
  }
  std::vector<OpenNode> open{{0, g0, h0}};
  auto score = [&](double g, double h) { return g * g / (h + p.reg_lambda); };
  auto leaf = [&](const OpenNode& n) {
    tree.nodes[static_cast<std::size_t>(n.id)].weight =
        -soft_threshold(n.g, p.reg_alpha) / (n.h + p.reg_lambda) * p.learning_rate;
  };
  std::vector<RowInfo> info(static_cast<std::size_t>(x.rows()));

  for (int depth = 0; depth < p.max_depth && !open.empty(); ++depth) {
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < open.size(); ++s) slot[static_cast<std::size_t>(open[s].id)] = static_cast<int>(s);
    for (std::size_t r = 0; r < info.size(); ++r) {
      const int pos = position[r];
      info[r] = {pos < 0 ? -1 : slot[static_cast<std::size_t>(pos)], grad[static_cast<Eigen::Index>(r)]};
    }
    std::vector<Candidate> best(open.size());
    std::vector<double> parent(open.size());
    for (std::size_t s = 0; s < open.size(); ++s) parent[s] = score(open[s].g, open[s].h) + 2.0 * p.gamma;
    std::vector<double> gl(open.size());
    std::vector<double> hl(open.size());
    std::vector<double> last(open.size());
    std::vector<char> seen(open.size());
    for (int f : features) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      const SortedColumn& col = sorted[static_cast<std::size_t>(f)];
      const std::size_t n = col.rows.size();
      for (std::size_t i = 0; i < n; ++i) {
        const RowInfo& row = info[static_cast<std::size_t>(col.rows[i])];
        const int s = row.slot;
        if (s < 0) continue;
        const double v = col.values[i];
        if (seen[s] && v > last[s]) {
          const OpenNode& node = open[static_cast<std::size_t>(s)];
          const double hr = node.h - hl[s];
          if (hl[s] >= p.min_child_weight && hr >= p.min_child_weight) {
            const double gain = 0.5 * (score(gl[s], hl[s]) + score(node.g - gl[s], hr) - parent[s]);
            if (gain > best[s].gain) {
              double threshold = 0.5 * (last[s] + v);
              if (!(threshold > last[s])) threshold = v;
              best[s] = {gain, f, threshold};
            }
          }
        }
        gl[s] += row.grad;
        hl[s] += 1.0;
        last[s] = v;
        seen[s] = 1;
      }
    }

    std::vector<OpenNode> next;
    std::vector<int> left_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < open.size(); ++s) {
      if (best[s].feature < 0) {
        leaf(open[s]);
        continue;
      }
      const int id = open[s].id;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      GbtTree::Node& node = tree.nodes[static_cast<std::size_t>(id)];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = left + 1;
      left_of[static_cast<std::size_t>(id)] = left;
    }
    // Route rows of split nodes and accumulate the children's sums.
    std::vector<double> cg(tree.nodes.size(), 0.0);
    std::vector<double> ch(tree.nodes.size(), 0.0);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      int& pos = position[static_cast<std::size_t>(r)];
      if (pos < 0) continue;
      const int left = left_of[static_cast<std::size_t>(pos)];
      if (left < 0) {
        pos = -1;  // settled in a leaf
        continue;
      }
      const GbtTree::Node& node = tree.nodes[static_cast<std::size_t>(pos)];
      pos = x(r, node.feature) < node.threshold ? left : left + 1;
      cg[static_cast<std::size_t>(pos)] += grad[r];
      ch[static_cast<std::size_t>(pos)] += 1.0;
    }
    for (std::size_t s = 0; s < open.size(); ++s) {
      const int left = left_of[static_cast<std::size_t>(open[s].id)];
      if (left < 0) continue;
      next.push_back({left, cg[static_cast<std::size_t>(left)], ch[static_cast<std::size_t>(left)]});
      next.push_back({left + 1, cg[static_cast<std::size_t>(left + 1)], ch[static_cast<std::size_t>(left + 1)]});
    }
    open = std::move(next);
  }
  for (const auto& n : open) leaf(n);
  return tree;
}

}  // namespace

GbtEnsemble train_gbt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtHyperParams& params) {
  params.validate();
  require(x.rows() == y.size(), "train_gbt: feature and label rows differ");
  require(x.rows() >= 2, "train_gbt: need at least two rows");
  require(x.cols() >= 1, "train_gbt: no feature columns");
  require(x.allFinite() && y.allFinite(), "train_gbt: non-finite input");

  const Eigen::Index n = x.rows();
  const auto n_features = static_cast<int>(x.cols());
  GbtEnsemble ens;
  ens.params = params;
  ens.n_features = x.cols();
  ens.base_score = y.mean();

  require(n < std::numeric_limits<std::int32_t>::max(), "train_gbt: too many rows");
  std::vector<SortedColumn> sorted(static_cast<std::size_t>(n_features));
  for (int f = 0; f < n_features; ++f) {
    SortedColumn& c = sorted[static_cast<std::size_t>(f)];
    c.rows.resize(static_cast<std::size_t>(n));
    std::iota(c.rows.begin(), c.rows.end(), std::int32_t{0});
    const double* col = x.col(f).data();
    std::stable_sort(c.rows.begin(), c.rows.end(), [col](std::int32_t a, std::int32_t b) { return col[a] < col[b]; });
    c.values.resize(c.rows.size());
    for (std::size_t i = 0; i < c.rows.size(); ++i) c.values[i] = col[c.rows[i]];
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n_cols = std::max(1, static_cast<int>(std::lround(params.colsample_bytree * n_features)));
  std::vector<int> all_features(static_cast<std::size_t>(n_features));
  std::iota(all_features.begin(), all_features.end(), 0);

  Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, ens.base_score);
  std::vector<int> position(static_cast<std::size_t>(n));
  ens.train_loss.push_back((pred - y).squaredNorm() / static_cast<double>(n));
  for (int round = 0; round < params.n_estimators; ++round) {
    const Eigen::VectorXd grad = pred - y;
    for (Eigen::Index r = 0; r < n; ++r) {
      position[static_cast<std::size_t>(r)] = (params.subsample >= 1.0 || unit(rng) < params.subsample) ? 0 : -1;
    }
    std::vector<int> features;
    if (n_cols >= n_features) {
      features = all_features;
    } else {
      std::sample(all_features.begin(), all_features.end(), std::back_inserter(features), n_cols, rng);
    }
    GbtTree tree = grow_tree(x, sorted, features, grad, position, params);
    for (Eigen::Index r = 0; r < n; ++r) pred[r] += tree.predict(x.data() + r, n);
    ens.trees.push_back(std::move(tree));
    ens.train_loss.push_back((pred - y).squaredNorm() / static_cast<double>(n));
  }
  return ens;
}

namespace {

nlohmann::json node_to_json(const GbtTree& t, int i) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.feature < 0) return {{"leaf", n.weight}};
  return {{"feature", n.feature}, {"threshold", n.threshold}, {"left", node_to_json(t, n.left)},
          {"right", node_to_json(t, n.right)}};
}

int node_from_json(const nlohmann::json& j, GbtTree& t) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("leaf")) {
    t.nodes[static_cast<std::size_t>(id)].weight = j.at("leaf").get<double>();
    return id;
  }
  GbtTree::Node node;
  node.feature = j.at("feature").get<int>();
  node.threshold = j.at("threshold").get<double>();
  node.left = node_from_json(j.at("left"), t);
  node.right = node_from_json(j.at("right"), t);
  t.nodes[static_cast<std::size_t>(id)] = node;
  return id;
}

}  // namespace

nlohmann::json to_json(const GbtEnsemble& e) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : e.trees) trees.push_back(node_to_json(t, 0));
  return {{"base_score", e.base_score}, {"n_features", e.n_features}, {"hyperparams", to_json(e.params)},
          {"trees", trees}};
}

GbtEnsemble ensemble_from_json(const nlohmann::json& j) {
  try {
    GbtEnsemble e;
    e.base_score = j.at("base_score").get<double>();
    e.n_features = j.at("n_features").get<Eigen::Index>();
    e.params = hyperparams_from_json(j.at("hyperparams"));
    for (const auto& tj : j.at("trees")) {
      GbtTree t;
      node_from_json(tj, t);
      e.trees.push_back(std::move(t));
    }
    e.validate();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("tree ensemble: ") + ex.what());
  }
}

}  // namespace hdyn
