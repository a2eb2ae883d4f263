#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hdyn/dynamics/robot_model.hpp"

namespace hdyn {

/// Oriented bounding box.
struct Obb {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();        // m
  Eigen::Vector3d half_extents = Eigen::Vector3d::Ones();  // m, > 0
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();

  void validate() const;
  Obb transformed(const Pose& pose) const;
  bool contains(const Eigen::Vector3d& p) const;
};

/// Separating-axis test over the 15 candidate axes. Touching boxes overlap.
bool obb_overlap(const Obb& a, const Obb& b);

/// Box-shaped collision geometry of a chain. `links[i]` is expressed in DH
/// frame i+1 (the frame link i+1 moves with); `base` in the base frame.
struct LinkBoxes {
  Obb base;
  std::vector<Obb> links;
};

/// Boxes enclosing the straight segment from the proximal to the distal joint
/// origin of every link, with the given half-widths (m).
LinkBoxes link_boxes_from_dh(const RobotModel& model, const std::vector<double>& half_widths,
                             const Obb& base);

LinkBoxes reference_link_boxes(const RobotModel& model);

/// World placement of every link box at configuration theta.
std::vector<Obb> place_link_boxes(const RobotModel& model, const Eigen::VectorXd& theta,
                                  const LinkBoxes& boxes);

/// True iff no non-adjacent link pair and no link/obstacle pair overlaps.
/// The base box counts as link 0; links touching the base through joint 1 are adjacent.
bool collision_free(const RobotModel& model, const Eigen::VectorXd& theta, const LinkBoxes& boxes,
                    const std::vector<Obb>& obstacles);

/// Floor slab whose top face sits just below z = 0.
Obb floor_box();

}  // namespace hdyn
