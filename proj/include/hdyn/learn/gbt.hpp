#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace hdyn {

struct GbtHyperParams {
  double learning_rate = 0.1;
  int max_depth = 6;
  double min_child_weight = 1.0;
  double colsample_bytree = 1.0;
  double subsample = 1.0;
  double reg_alpha = 0.0;
  double reg_lambda = 1.0;
  double gamma = 0.0;
  int n_estimators = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const GbtHyperParams& p);
GbtHyperParams hyperparams_from_json(const nlohmann::json& j, GbtHyperParams base = {});

/// Names accepted by set_hyperparam / get_hyperparam.
const std::vector<std::string>& hyperparam_names();
void set_hyperparam(GbtHyperParams& p, const std::string& name, double value);
double get_hyperparam(const GbtHyperParams& p, const std::string& name);

/// Binary regression tree; node 0 is the root. Rows with x[feature] < threshold go left.
struct GbtTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;  // leaf output, learning rate included
  };
  std::vector<Node> nodes;

  double predict(const double* x, Eigen::Index stride = 1) const;
  int depth() const;
};

struct GbtEnsemble {
  double base_score = 0.0;
  std::vector<GbtTree> trees;
  GbtHyperParams params;
  Eigen::Index n_features = 0;
  std::vector<double> train_loss;  // mean squared error before round 1 and after every round

  double predict_row(const double* x, Eigen::Index stride = 1) const;
  /// One prediction per row of `x`.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  void validate() const;
};

/// Second-order boosting of the squared error with exact greedy splits.
/// Ties between equal gains keep the lowest feature index, then the lowest threshold.
GbtEnsemble train_gbt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtHyperParams& params);

nlohmann::json to_json(const GbtEnsemble& e);
GbtEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace hdyn
