#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdyn/learn/gbt.hpp"

namespace hdyn {

/// Candidate lists swept one parameter at a time.
struct HyperSpace {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  int passes = 3;

  void validate() const;
};

HyperSpace hyperspace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HyperSpace& space);

struct SearchStep {
  int pass = 0;
  std::string name;
  double value = 0.0;
  double score = 0.0;
};

struct SearchResult {
  GbtHyperParams best;
  double best_score = 0.0;
  std::vector<SearchStep> trace;
};

/// Raised when the objective throws; carries the parameters that failed.
class SearchError : public std::runtime_error {
 public:
  SearchError(const std::string& what, GbtHyperParams params)
      : std::runtime_error(what), params_(params) {}
  const GbtHyperParams& params() const { return params_; }

 private:
  GbtHyperParams params_;
};

using Objective = std::function<double(const GbtHyperParams&)>;

/// Sweeps each parameter over its list with the others held at the best point
/// seen so far, for `passes` rounds. Lower scores win; ties keep the earlier
/// point. Evaluations = passes * sum of list lengths. The result never scores
/// worse than `initial` when every initial value appears in its list.
SearchResult coordinate_grid_search(const HyperSpace& space, const Objective& objective,
                                    const GbtHyperParams& initial);

}  // namespace hdyn
