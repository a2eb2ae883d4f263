#include "hdyn/dynamics/robot_config.hpp"

#include <fstream>
#include <numbers>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Eigen::VectorXd vec_from(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json vec_to(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

RobotModel robot_from_json(const nlohmann::json& j) {
  RobotModel m;
  try {
    for (const auto& row : j.at("dh")) {
      if (row.size() != 4) throw ConfigError("robot config: each dh row needs [a, alpha, d, offset]");
      m.dh.push_back({row[0].get<double>(), row[1].get<double>() * kDeg, row[2].get<double>(),
                      row[3].get<double>() * kDeg});
    }
    m.link_mass = j.at("mass").get<std::vector<double>>();
    for (const auto& c : j.at("com")) {
      m.link_com.emplace_back(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
    }
    for (const auto& in : j.at("inertia")) {
      if (in.size() != 6) throw ConfigError("robot config: inertia rows need [ixx, iyy, izz, ixy, ixz, iyz]");
      Eigen::Matrix3d I;
      const double ixx = in[0], iyy = in[1], izz = in[2], ixy = in[3], ixz = in[4], iyz = in[5];
      I << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
      m.link_inertia.push_back(I);
    }
    for (const auto& lim : j.at("limits")) {
      m.joint_limits.push_back({lim.at(0).get<double>() * kDeg, lim.at(1).get<double>() * kDeg});
    }
    const auto g = j.at("gravity");
    m.gravity = Eigen::Vector3d(g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>());
    m.wrist_lump_mass = j.value("wrist_lump_mass", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("robot config: ") + e.what());
  }
  try {
    m.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return m;
}

nlohmann::json robot_to_json(const RobotModel& m) {
  nlohmann::json j;
  for (const auto& r : m.dh) j["dh"].push_back({r.a, r.alpha / kDeg, r.d, r.theta_offset / kDeg});
  j["mass"] = m.link_mass;
  for (const auto& c : m.link_com) j["com"].push_back({c.x(), c.y(), c.z()});
  for (const auto& I : m.link_inertia) {
    j["inertia"].push_back({I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(0, 2), I(1, 2)});
  }
  for (const auto& l : m.joint_limits) j["limits"].push_back({l.min / kDeg, l.max / kDeg});
  j["gravity"] = {m.gravity.x(), m.gravity.y(), m.gravity.z()};
  j["wrist_lump_mass"] = m.wrist_lump_mass;
  return j;
}

RobotModel load_robot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("robot config '" + path + "': " + e.what());
  }
  return robot_from_json(j);
}

LossParams loss_from_json(const nlohmann::json& j) {
  try {
    LossParams p{vec_from(j.at("b_m")), vec_from(j.at("c_m")), vec_from(j.at("f_c"))};
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("loss params: ") + e.what());
  }
}

nlohmann::json loss_to_json(const LossParams& loss) {
  return {{"b_m", vec_to(loss.b_m)}, {"c_m", vec_to(loss.c_m)}, {"f_c", vec_to(loss.f_c)}};
}

}  // namespace hdyn
