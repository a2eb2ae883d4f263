#include "hdyn/learn/grid_search.hpp"

#include <limits>
#include <set>

#include "hdyn/common/errors.hpp"

namespace hdyn {

void HyperSpace::validate() const {
  require(names.size() == values.size(), "HyperSpace: one value list per name");
  require(!names.empty(), "HyperSpace: empty space");
  require(passes >= 1, "HyperSpace: passes must be >= 1");
  std::set<std::string> seen;
  GbtHyperParams probe;
  for (std::size_t i = 0; i < names.size(); ++i) {
    require(seen.insert(names[i]).second, "HyperSpace: duplicate parameter '" + names[i] + "'");
    require(!values[i].empty(), "HyperSpace: empty list for '" + names[i] + "'");
    set_hyperparam(probe, names[i], values[i][0]);  // rejects unknown names
  }
}

HyperSpace hyperspace_from_json(const nlohmann::json& j) {
  try {
    HyperSpace s;
    s.passes = j.value("passes", 3);
    for (const auto& [name, list] : j.at("lists").items()) {
      s.names.push_back(name);
      s.values.push_back(list.get<std::vector<double>>());
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hyperparameter space: ") + e.what());
  }
}

nlohmann::json to_json(const HyperSpace& space) {
  nlohmann::json lists = nlohmann::json::object();
  for (std::size_t i = 0; i < space.names.size(); ++i) lists[space.names[i]] = space.values[i];
  return {{"passes", space.passes}, {"lists", lists}};
}

SearchResult coordinate_grid_search(const HyperSpace& space, const Objective& objective,
                                    const GbtHyperParams& initial) {
  space.validate();
  SearchResult result;
  result.best = initial;
  result.best_score = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < space.passes; ++pass) {
    for (std::size_t i = 0; i < space.names.size(); ++i) {
      const GbtHyperParams held = result.best;
      for (double value : space.values[i]) {
        GbtHyperParams candidate = held;
        set_hyperparam(candidate, space.names[i], value);
        double score = 0.0;
        try {
          candidate.validate();
          score = objective(candidate);
        } catch (const std::exception& e) {
          throw SearchError("grid search: objective failed at " + to_json(candidate).dump() + ": " + e.what(),
                            candidate);
        }
        result.trace.push_back({pass, space.names[i], value, score});
        if (score < result.best_score) {
          result.best_score = score;
          result.best = candidate;
        }
      }
    }
  }
  return result;
}

}  // namespace hdyn
