#include "hdyn/task/peg_hole.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "hdyn/common/errors.hpp"

namespace hdyn {

namespace {

constexpr int kRings = 4;
constexpr int kAngles = 24;
constexpr int kHeights = 24;
constexpr double kSlipEps = 1e-6;  // m, friction regularization
constexpr double kTipZone = 0.002; // m above the bottom face still counted as the tip edge

// Bottom face as rings, side as generator lines; the peg body extends along
// -z from the tip.
std::vector<Eigen::Vector3d> peg_samples(double diameter, double length) {
  std::vector<Eigen::Vector3d> pts{Eigen::Vector3d::Zero()};
  const double radius = diameter / 2.0;
  for (int i = 1; i <= kRings; ++i) {
    const double r = radius * i / kRings;
    for (int a = 0; a < kAngles; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / kAngles;
      pts.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
    }
  }
  for (int h = 1; h <= kHeights; ++h) {
    const double z = -length * h / kHeights;
    for (int a = 0; a < kAngles; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / kAngles;
      pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
    }
  }
  return pts;
}

enum class Face { None, Top, Wall, Bottom };

struct Penetration {
  Face face = Face::None;
  double depth = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // push on the peg
};

Penetration penetrate(const PegHoleScene& s, const Eigen::Vector3d& p) {
  Penetration out;
  if (p.z() <= 0.0) return out;
  const double bore = s.hole_diameter / 2.0;
  const double r = std::hypot(p.x(), p.y());
  if (r < bore) {
    if (p.z() > s.hole_depth) out = {Face::Bottom, p.z() - s.hole_depth, {0.0, 0.0, -1.0}};
    return out;
  }
  const double wall = r - bore;
  if (p.z() <= wall) return {Face::Top, p.z(), {0.0, 0.0, -1.0}};
  return {Face::Wall, wall, {-p.x() / r, -p.y() / r, 0.0}};
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::string to_string(ContactState s) {
  switch (s) {
    case ContactState::Approach: return "approach";
    case ContactState::StuckOutside: return "stuck_outside";
    case ContactState::StuckInside: return "stuck_inside";
    case ContactState::Inserted: return "inserted";
  }
  return "unknown";
}

std::string to_string(PegAction a) {
  switch (a) {
    case PegAction::Advance: return "advance";
    case PegAction::Retreat: return "retreat";
    case PegAction::Correct: return "correct";
    case PegAction::Hold: return "hold";
    case PegAction::Stop: return "stop";
  }
  return "unknown";
}

void PegHoleScene::validate() const {
  require(hole_depth > 0.0 && hole_diameter > 0.0 && peg_length > 0.0 && peg_diameter > 0.0,
          "PegHoleScene: depths, lengths and diameters must be positive");
  require(peg_diameter < hole_diameter, "PegHoleScene: peg must be narrower than the hole");
  require(friction_coeff >= 0.0 && contact_stiffness > 0.0,
          "PegHoleScene: friction must be >= 0 and stiffness positive");
  require(max_offset >= 0.0 && max_tilt >= 0.0 && start_height >= 0.0,
          "PegHoleScene: initial pose bounds must be >= 0");
}

Eigen::Matrix3d PegPose::rotation() const {
  const double angle = tilt.norm();
  if (angle < 1e-15) return Eigen::Matrix3d::Identity();
  const Eigen::Vector3d axis(tilt.x() / angle, tilt.y() / angle, 0.0);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

namespace {

// Penetrating samples of one contact patch, reduced to a single contact at
// the deepest penetration.
struct Patch {
  double depth = 0.0;
  double weight = 0.0;
  Eigen::Vector3d arm = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  Eigen::Vector3d slip = Eigen::Vector3d::Zero();

  void add(const Penetration& pen, const Eigen::Vector3d& a, const Eigen::Vector3d& v) {
    depth = std::max(depth, pen.depth);
    weight += pen.depth;
    arm += pen.depth * a;
    normal += pen.depth * pen.normal;
    slip += pen.depth * v;
  }
};

void apply_patch(const PegHoleScene& scene, const Patch& patch, Eigen::Vector3d& force, Eigen::Vector3d& moment) {
  if (patch.weight <= 0.0) return;
  const Eigen::Vector3d arm = patch.arm / patch.weight;
  const Eigen::Vector3d n = patch.normal.normalized();
  const Eigen::Vector3d v = patch.slip / patch.weight;
  const Eigen::Vector3d vt = v - v.dot(n) * n;
  const double fn = scene.contact_stiffness * patch.depth;
  const Eigen::Vector3d f = fn * n - scene.friction_coeff * fn * vt / std::sqrt(vt.squaredNorm() + kSlipEps * kSlipEps);
  force += f;
  moment += arm.cross(f);
}

}  // namespace

ContactResult simulate_contact(const PegHoleScene& scene, const PegPose& pose, const PegPose& previous) {
  const std::vector<Eigen::Vector3d> samples = peg_samples(scene.peg_diameter, scene.peg_length);
  const Eigen::Matrix3d rot = pose.rotation();
  const Eigen::Matrix3d rot_prev = previous.rotation();

  struct Hit {
    Penetration pen;
    Eigen::Vector3d arm, slip;
    bool body;
  };
  std::vector<Hit> walls;
  Patch top, bottom;
  ContactResult out;
  for (const Eigen::Vector3d& body : samples) {
    const Eigen::Vector3d arm = rot * body;
    const Eigen::Vector3d p = pose.tip + arm;
    const Penetration pen = penetrate(scene, p);
    if (pen.face == Face::None) continue;
    const Eigen::Vector3d slip = p - (previous.tip + rot_prev * body);
    switch (pen.face) {
      case Face::Top:
        top.add(pen, arm, slip);
        out.surface_penetration = std::max(out.surface_penetration, pen.depth);
        break;
      case Face::Bottom:
        bottom.add(pen, arm, slip);
        out.bottom_penetration = std::max(out.bottom_penetration, pen.depth);
        break;
      case Face::Wall:
        walls.push_back({pen, arm, slip, body.z() < -kTipZone});
        out.wall_penetration = std::max(out.wall_penetration, pen.depth);
        break;
      case Face::None: break;
    }
  }
  // Wall hits split by side of the bore, so a jammed peg gets two contacts.
  Patch near, far;
  if (!walls.empty()) {
    const auto deepest = std::max_element(walls.begin(), walls.end(),
                                          [](const Hit& a, const Hit& b) { return a.pen.depth < b.pen.depth; });
    const Eigen::Vector3d side = deepest->pen.normal;
    for (const Hit& h : walls) {
      const std::size_t s = h.pen.normal.dot(side) >= 0.0 ? 0 : 1;
      (s == 0 ? near : far).add(h.pen, h.arm, h.slip);
      double& slot = h.body ? out.wall_body[s] : out.wall_tip[s];
      slot = std::max(slot, h.pen.depth);
    }
    out.wall_points = static_cast<int>(walls.size());
  }
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  for (const Patch* patch : {&top, &bottom, &near, &far}) apply_patch(scene, *patch, force, moment);
  // Reported as what the peg applies to the environment.
  out.wrench = {-force, -moment};
  return out;
}

void ContactThresholds::validate() const {
  require(f_contact > 0.0 && m_contact > 0.0, "ContactThresholds: force and moment thresholds must be positive");
  require(depth_entry >= 0.0 && hole_depth > depth_entry, "ContactThresholds: need 0 <= depth_entry < hole_depth");
  require(tolerance >= 0.0 && tolerance < hole_depth - depth_entry, "ContactThresholds: tolerance out of range");
}

ContactState classify_contact(const Wrench& estimate, double insertion_depth, const ContactThresholds& t) {
  if (insertion_depth >= t.hole_depth - t.tolerance) return ContactState::Inserted;
  const bool pressing = std::abs(estimate.f_z) >= t.f_contact;
  if (insertion_depth < t.depth_entry) return pressing ? ContactState::StuckOutside : ContactState::Approach;
  const bool twisting = std::hypot(estimate.m_x, estimate.m_y) >= t.m_contact;
  return (pressing || twisting) ? ContactState::StuckInside : ContactState::Approach;
}

ContactState geometric_contact_state(const PegHoleScene& scene, const PegPose& pose, const ContactThresholds& t,
                                     double min_penetration) {
  const double depth = pose.tip.z();
  if (depth >= t.hole_depth - t.tolerance) return ContactState::Inserted;
  const ContactResult c = simulate_contact(scene, pose, pose);
  if (depth < t.depth_entry) {
    return c.surface_penetration >= min_penetration ? ContactState::StuckOutside : ContactState::Approach;
  }
  const auto side = [&](std::size_t i) { return std::max(c.wall_tip[i], c.wall_body[i]); };
  const bool two_sided = side(0) >= min_penetration && side(1) >= min_penetration;
  const bool leaning = c.wall_body[0] - c.wall_tip[0] >= min_penetration ||
                       c.wall_body[1] - c.wall_tip[1] >= min_penetration;
  const bool stuck = two_sided || leaning || c.bottom_penetration >= min_penetration;
  return stuck ? ContactState::StuckInside : ContactState::Approach;
}

bool transition_allowed(ContactState from, ContactState to) {
  using S = ContactState;
  if (from == to) return true;
  switch (from) {
    case S::Approach: return true;
    case S::StuckOutside: return to == S::Approach;
    case S::StuckInside: return to == S::Approach || to == S::Inserted;
    case S::Inserted: return false;
  }
  return false;
}

ContactState ContactStateMachine::advance(ContactState observed) {
  if (transition_allowed(state_, observed)) {
    state_ = observed;
  } else if (transition_allowed(state_, ContactState::Approach)) {
    state_ = ContactState::Approach;
  }
  return state_;
}

void PegControllerParams::validate() const {
  thresholds.validate();
  lateral.validate();
  rotation.validate();
  require(advance_step > 0.0 && retreat >= 0.0, "PegControllerParams: advance must be positive, retreat >= 0");
  require(search_step >= min_search_step && min_search_step > 0.0,
          "PegControllerParams: need 0 < min_search_step <= search_step");
  require(max_lateral_step > 0.0 && max_rotation_step > 0.0, "PegControllerParams: step caps must be positive");
  require(settle_steps >= 0, "PegControllerParams: settle_steps must be >= 0");
  require(outside_rotation_scale >= 0.0, "PegControllerParams: outside_rotation_scale must be >= 0");
}

namespace {

Eigen::Vector2d clip(const Eigen::Vector2d& v, double cap) {
  const double n = v.norm();
  return n > cap ? Eigen::Vector2d(v * (cap / n)) : v;
}

// Lateral motion that lets the peg slide the way the contact pushes it.
Eigen::Vector2d lateral_correction(const Wrench& w, const ImpedanceParams& p) {
  return {impedance_displacement(p, w.m_y), -impedance_displacement(p, w.m_x)};
}

Eigen::Vector2d rotation_correction(const Wrench& w, const ImpedanceParams& p) {
  return {-impedance_displacement(p, w.m_x), -impedance_displacement(p, w.m_y)};
}

}  // namespace

PegCommand peg_step(ContactState state, const Wrench& estimate, const PegControllerParams& params,
                    double search_step) {
  PegCommand cmd;
  switch (state) {
    case ContactState::Approach:
      cmd.action = PegAction::Advance;
      cmd.translation.z() = params.advance_step;
      break;
    case ContactState::StuckOutside:
      cmd.action = PegAction::Retreat;
      cmd.translation.head<2>() = clip(lateral_correction(estimate, params.lateral), search_step);
      cmd.translation.z() = -params.retreat;
      cmd.rotation = clip(params.outside_rotation_scale * rotation_correction(estimate, params.rotation),
                          params.max_rotation_step);
      break;
    case ContactState::StuckInside:
      cmd.action = PegAction::Correct;
      cmd.translation.head<2>() = clip(lateral_correction(estimate, params.lateral), params.max_lateral_step);
      cmd.rotation = clip(rotation_correction(estimate, params.rotation), params.max_rotation_step);
      break;
    case ContactState::Inserted:
      cmd.action = PegAction::Stop;
      break;
  }
  return cmd;
}

PegController::PegController(PegControllerParams params, PegPose start)
    : params_(std::move(params)), commanded_(std::move(start)), search_step_(params_.search_step) {
  params_.validate();
}

PegCommand PegController::step(const Wrench& estimate) {
  if (machine_.state() == ContactState::Inserted) return {PegAction::Stop, {}, {}};
  if (probe_left_ > 0) {
    --probe_left_;
    if (probe_left_ < (params_.settle_steps + 1) / 2) {
      probe_sum_ += Eigen::Vector3d(estimate.f_z, estimate.m_x, estimate.m_y);
      ++probe_used_;
    }
    if (probe_left_ > 0) return {};
    const Eigen::Vector3d mean = probe_sum_ / std::max(1, probe_used_);
    return decide({mean.x(), mean.y(), mean.z()});
  }
  const ContactState seen = classify_contact(estimate, commanded_.tip.z(), params_.thresholds);
  if ((seen == ContactState::StuckOutside || seen == ContactState::StuckInside) && params_.settle_steps > 0) {
    probe_left_ = params_.settle_steps;
    probe_used_ = 0;
    probe_sum_.setZero();
    return {};
  }
  return decide(estimate);
}

PegCommand PegController::decide(const Wrench& settled) {
  const ContactState state = machine_.advance(classify_contact(settled, commanded_.tip.z(), params_.thresholds));
  if (state == ContactState::StuckOutside) {
    const Eigen::Vector2d dir = lateral_correction(settled, params_.lateral);
    if (dir.dot(last_search_dir_) < 0.0) search_step_ = std::max(params_.min_search_step, search_step_ / 2.0);
    if (dir.squaredNorm() > 0.0) last_search_dir_ = dir.normalized();
  }
  const PegCommand cmd = peg_step(state, settled, params_, search_step_);
  commanded_.tip += cmd.translation;
  commanded_.tilt += cmd.rotation;
  // Still touching after an in-hole correction: look again before moving on.
  if (cmd.action == PegAction::Correct && params_.settle_steps > 0) {
    probe_left_ = params_.settle_steps;
    probe_used_ = 0;
    probe_sum_.setZero();
  }
  return cmd;
}

void PegEpisodeConfig::validate() const {
  scene.validate();
  controller.validate();
  sensor.validate();
  require(max_steps >= 1, "PegEpisodeConfig: max_steps must be >= 1");
  require(max_penetration > 0.0, "PegEpisodeConfig: max_penetration must be positive");
  require(std::abs(controller.thresholds.hole_depth - scene.hole_depth) < 1e-12,
          "PegEpisodeConfig: controller hole depth must match the scene");
}

PegEpisodeConfig reference_peg_episode() {
  PegEpisodeConfig c;
  c.sensor = reference_sensor_chain();
  c.sensor.tool_length = c.scene.peg_length;
  return c;
}

PegPose random_peg_start(const PegHoleScene& scene, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double r = scene.max_offset * std::sqrt(uniform(rng, 0.0, 1.0));
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  PegPose p;
  p.tip = {r * std::cos(phi), r * std::sin(phi), -scene.start_height};
  const double tilt = scene.max_tilt * uniform(rng, 0.0, 1.0);
  const double tilt_dir = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  p.tilt = {tilt * std::cos(tilt_dir), tilt * std::sin(tilt_dir)};
  return p;
}

PegEpisodeResult run_peg_episode(const PegEpisodeConfig& config, std::uint64_t seed, bool keep_records) {
  config.validate();
  PegEpisodeResult result;
  result.initial = random_peg_start(config.scene, seed);
  SensorChain sensor(config.sensor, seed ^ 0x9e3779b97f4a7c15ULL);
  PegController controller(config.controller, result.initial);
  PegPose pose = result.initial;
  PegPose previous = pose;
  const double dt = config.controller.lateral.dt;
  for (int k = 0; k < config.max_steps; ++k) {
    const ContactResult contact = simulate_contact(config.scene, pose, previous);
    result.max_force = std::max(result.max_force, contact.wrench.force.norm());
    result.max_moment = std::max(result.max_moment, contact.wrench.moment.norm());
    result.max_penetration = std::max(
        {result.max_penetration, contact.surface_penetration, contact.wall_penetration, contact.bottom_penetration});
    const Wrench estimate = sensor.measure(contact.wrench);
    const PegCommand cmd = controller.step(estimate);
    if (keep_records) result.records.push_back({k * dt, cmd, controller.state(), estimate, contact.wrench, pose});
    result.steps = k + 1;
    if (controller.done()) {
      result.success = pose.tip.z() >= config.scene.hole_depth - config.controller.thresholds.tolerance &&
                       result.max_penetration <= config.max_penetration;
      break;
    }
    previous = pose;
    pose = controller.commanded();
  }
  return result;
}

void write_peg_csv(const PegEpisodeResult& result, std::ostream& out) {
  out << "t,action,state,dx,dy,dz,drx,dry,fz_hat,mx_hat,my_hat,fx,fy,fz,mx,my,mz,x,y,z,rx,ry\n";
  for (const PegStepRecord& r : result.records) {
    out << r.t << ',' << to_string(r.command.action) << ',' << to_string(r.state);
    for (int i = 0; i < 3; ++i) out << ',' << r.command.translation[i];
    out << ',' << r.command.rotation.x() << ',' << r.command.rotation.y();
    out << ',' << r.estimate.f_z << ',' << r.estimate.m_x << ',' << r.estimate.m_y;
    for (int i = 0; i < 3; ++i) out << ',' << r.truth.force[i];
    for (int i = 0; i < 3; ++i) out << ',' << r.truth.moment[i];
    for (int i = 0; i < 3; ++i) out << ',' << r.pose.tip[i];
    out << ',' << r.pose.tilt.x() << ',' << r.pose.tilt.y() << '\n';
  }
}

nlohmann::json peg_summary_json(const PegEpisodeResult& result) {
  return {{"success", result.success},
          {"steps", result.steps},
          {"max_force", result.max_force},
          {"max_moment", result.max_moment},
          {"max_penetration", result.max_penetration},
          {"initial_offset", {result.initial.tip.x(), result.initial.tip.y()}},
          {"initial_tilt", {result.initial.tilt.x(), result.initial.tilt.y()}}};
}

}  // namespace hdyn
