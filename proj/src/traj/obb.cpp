#include "hdyn/traj/obb.hpp"

#include <cmath>

#include "hdyn/common/errors.hpp"
#include "hdyn/dynamics/kinematics.hpp"

namespace hdyn {

void Obb::validate() const {
  require(half_extents.minCoeff() > 0.0 && half_extents.allFinite(), "Obb: half extents must be positive");
  require(center.allFinite(), "Obb: non-finite center");
  const double ortho = (orientation.transpose() * orientation - Eigen::Matrix3d::Identity()).norm();
  require(ortho < 1e-9, "Obb: orientation is not orthonormal");
}

Obb Obb::transformed(const Pose& pose) const {
  return {pose.apply(center), half_extents, pose.rotation * orientation};
}

bool Obb::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d local = orientation.transpose() * (p - center);
  return (local.cwiseAbs() - half_extents).maxCoeff() <= 0.0;
}

bool obb_overlap(const Obb& a, const Obb& b) {
  const Eigen::Vector3d t = b.center - a.center;
  auto separated_on = [&](const Eigen::Vector3d& axis) {
    double ra = 0.0;
    double rb = 0.0;
    for (int i = 0; i < 3; ++i) {
      ra += a.half_extents[i] * std::abs(a.orientation.col(i).dot(axis));
      rb += b.half_extents[i] * std::abs(b.orientation.col(i).dot(axis));
    }
    return std::abs(t.dot(axis)) > ra + rb;
  };
  for (int i = 0; i < 3; ++i) {
    if (separated_on(a.orientation.col(i)) || separated_on(b.orientation.col(i))) return false;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector3d axis = a.orientation.col(i).cross(b.orientation.col(j));
      // Parallel edges give no new axis; the face axes already cover that case.
      if (axis.norm() < 1e-12) continue;
      if (separated_on(axis)) return false;
    }
  }
  return true;
}

namespace {

Eigen::Matrix3d frame_along(const Eigen::Vector3d& u) {
  const Eigen::Vector3d x = u.normalized();
  const Eigen::Vector3d helper =
      std::abs(x.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d y = helper.cross(x).normalized();
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = x.cross(y);
  return r;
}

}  // namespace

LinkBoxes link_boxes_from_dh(const RobotModel& model, const std::vector<double>& half_widths,
                             const Obb& base) {
  require(half_widths.size() == model.n_joints(), "link_boxes_from_dh: one half width per link");
  base.validate();
  LinkBoxes boxes;
  boxes.base = base;
  for (std::size_t i = 0; i < model.n_joints(); ++i) {
    const DhRow& row = model.dh[i];
    const double r = half_widths[i];
    require(r > 0.0, "link_boxes_from_dh: half width must be positive");
    // Proximal joint origin seen from the link's own frame.
    const Eigen::Vector3d proximal(-row.a, -row.d * std::sin(row.alpha), -row.d * std::cos(row.alpha));
    const double length = proximal.norm();
    Obb box;
    if (length < 1e-9) {
      box.half_extents = Eigen::Vector3d::Constant(r);
    } else {
      box.center = 0.5 * proximal;
      box.orientation = frame_along(proximal);
      box.half_extents = Eigen::Vector3d(0.5 * length, r, r);
    }
    boxes.links.push_back(box);
  }
  return boxes;
}

LinkBoxes reference_link_boxes(const RobotModel& model) {
  Obb base;
  base.center = Eigen::Vector3d(0.0, 0.0, 0.025);
  base.half_extents = Eigen::Vector3d(0.08, 0.08, 0.025);
  std::vector<double> widths(model.n_joints(), 0.04);
  const double preset[] = {0.06, 0.06, 0.05, 0.045, 0.045, 0.04};
  for (std::size_t i = 0; i < widths.size() && i < 6; ++i) widths[i] = preset[i];
  return link_boxes_from_dh(model, widths, base);
}

std::vector<Obb> place_link_boxes(const RobotModel& model, const Eigen::VectorXd& theta,
                                  const LinkBoxes& boxes) {
  require(boxes.links.size() == model.n_joints(), "place_link_boxes: box count mismatch");
  const ChainFrames frames = chain_frames(model, theta);
  std::vector<Obb> placed;
  placed.reserve(boxes.links.size());
  for (std::size_t i = 0; i < boxes.links.size(); ++i) {
    placed.push_back(boxes.links[i].transformed({frames.rotation[i + 1], frames.origin[i + 1]}));
  }
  return placed;
}

bool collision_free(const RobotModel& model, const Eigen::VectorXd& theta, const LinkBoxes& boxes,
                    const std::vector<Obb>& obstacles) {
  const std::vector<Obb> links = place_link_boxes(model, theta, boxes);
  const std::size_t n = links.size();
  // Body 0 is the base, body k is link k.
  auto body = [&](std::size_t k) -> const Obb& { return k == 0 ? boxes.base : links[k - 1]; };
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = i + 2; j <= n; ++j) {
      if (obb_overlap(body(i), body(j))) return false;
    }
  }
  for (const Obb& link : links) {
    for (const Obb& obstacle : obstacles) {
      if (obb_overlap(link, obstacle)) return false;
    }
  }
  return true;
}

Obb floor_box() {
  Obb floor;
  floor.half_extents = Eigen::Vector3d(5.0, 5.0, 0.5);
  floor.center = Eigen::Vector3d(0.0, 0.0, -0.5 - 1e-3);
  return floor;
}

}  // namespace hdyn
