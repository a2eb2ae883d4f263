#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "hdyn/dynamics/robot_model.hpp"

namespace hdyn {

// Robot description file (JSON). Angles are in degrees on disk.
//
//   dh               [[a m, alpha deg, d m, theta_offset deg], ...]
//   mass             [kg, ...]
//   com              [[x, y, z] m, ...]                 link frame
//   inertia          [[ixx, iyy, izz, ixy, ixz, iyz] kg m^2, ...]  about COM
//   limits           [[min deg, max deg], ...]
//   gravity          [gx, gy, gz] m/s^2
//   wrist_lump_mass  kg
//   loss (optional)  {"b_m": [...], "c_m": [...], "f_c": [...]}
RobotModel robot_from_json(const nlohmann::json& j);
nlohmann::json robot_to_json(const RobotModel& model);
RobotModel load_robot(const std::string& path);

LossParams loss_from_json(const nlohmann::json& j);
nlohmann::json loss_to_json(const LossParams& loss);

}  // namespace hdyn
