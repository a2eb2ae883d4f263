#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdyn/sense/virtual_sensor.hpp"
#include "hdyn/task/impedance.hpp"
#include "hdyn/task/sensor_chain.hpp"

namespace hdyn {

// Task frame: origin at the centre of the hole mouth, z pointing into the
// hole. Surface material fills z > 0 outside the bore and z > depth inside.

enum class ContactState { Approach, StuckOutside, StuckInside, Inserted };

std::string to_string(ContactState s);

struct PegHoleScene {
  double hole_depth = 0.030;        // m
  double hole_diameter = 0.0218;    // m
  double peg_length = 0.048;        // m
  double peg_diameter = 0.0214;     // m
  double friction_coeff = 0.2;
  double contact_stiffness = 5e5;   // N/m, lumped tool, fixture and part compliance
  double max_offset = 0.002;        // m, initial lateral offset bound
  double max_tilt = 0.0349;         // rad, initial tilt bound
  double start_height = 0.003;      // m above the mouth

  void validate() const;
};

/// Tip position (centre of the bottom face) and tilt as a rotation vector
/// about the task x and y axes.
struct PegPose {
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();
  Eigen::Vector2d tilt = Eigen::Vector2d::Zero();  // rad

  Eigen::Matrix3d rotation() const;
};

struct ContactResult {
  TaskWrench wrench;                // applied by the peg on the environment
  double surface_penetration = 0.0; // m, deepest point on the top face
  double wall_penetration = 0.0;    // m, deepest point on the bore wall
  // Per side of the bore (deepest side first): deepest wall penetration of
  // the tip edge and of the body above it.
  std::array<double, 2> wall_tip{};
  std::array<double, 2> wall_body{};
  double bottom_penetration = 0.0;  // m, deepest point on the hole bottom
  int wall_points = 0;
};

/// Quasi-static penalty contact with regularized Coulomb friction. `previous`
/// gives each sample point's sliding direction; pass the same pose for none.
ContactResult simulate_contact(const PegHoleScene& scene, const PegPose& pose, const PegPose& previous);

struct ContactThresholds {
  double f_contact = 12.0;     // N
  double m_contact = 0.2;      // N m
  double depth_entry = 0.001;  // m
  double hole_depth = 0.030;   // m
  double tolerance = 0.0005;   // m

  void validate() const;
};

ContactState classify_contact(const Wrench& estimate, double insertion_depth, const ContactThresholds& thresholds);

/// Ground-truth label from the geometry alone, for checking the classifier:
/// outside the hole, resting on the top face; inside, wedged (touching both
/// sides of the bore, or pressed harder up the body than at the tip edge) or
/// on the bottom. A straight peg sliding along one wall is not stuck.
ContactState geometric_contact_state(const PegHoleScene& scene, const PegPose& pose,
                                     const ContactThresholds& thresholds, double min_penetration);

bool transition_allowed(ContactState from, ContactState to);

/// Routes observations along the allowed graph; a forbidden jump goes
/// through Approach first.
class ContactStateMachine {
 public:
  ContactState state() const { return state_; }
  ContactState advance(ContactState observed);

 private:
  ContactState state_ = ContactState::Approach;
};

struct PegControllerParams {
  ContactThresholds thresholds;
  double advance_step = 2e-5;      // m per decision
  double retreat = 2e-4;           // m
  double search_step = 8e-4;       // m, first lateral step cap when stuck outside
  double min_search_step = 5e-5;   // m
  double max_lateral_step = 1e-5;  // m, cap when stuck inside
  double max_rotation_step = 0.004; // rad
  double outside_rotation_scale = 0.0;  // tilt correction while stuck outside, fraction of the in-hole gain
  int settle_steps = 16;           // held samples before deciding on a contact; the later half is averaged
  ImpedanceParams lateral{1.0, 10.0, 2.0, 0.2, 0.008};   // m per N m of moment
  ImpedanceParams rotation{1.0, 10.0, 60.0, 6.0, 0.008}; // rad per N m of moment

  void validate() const;
};

enum class PegAction { Advance, Retreat, Correct, Hold, Stop };

std::string to_string(PegAction a);

struct PegCommand {
  PegAction action = PegAction::Hold;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // m, task frame
  Eigen::Vector2d rotation = Eigen::Vector2d::Zero();     // rad
};

/// One decision of the insertion strategy. Pure in its inputs.
PegCommand peg_step(ContactState state, const Wrench& estimate, const PegControllerParams& params,
                    double search_step);

/// Closed-loop controller. Sees only the wrench estimate and its own
/// commanded pose. A suspected contact stops the motion; the decision is made
/// on the settled, averaged estimate.
class PegController {
 public:
  PegController(PegControllerParams params, PegPose start);

  PegCommand step(const Wrench& estimate);

  const PegPose& commanded() const { return commanded_; }
  ContactState state() const { return machine_.state(); }
  bool done() const { return machine_.state() == ContactState::Inserted; }

 private:
  PegControllerParams params_;
  PegPose commanded_;
  ContactStateMachine machine_;
  double search_step_;
  Eigen::Vector2d last_search_dir_ = Eigen::Vector2d::Zero();
  int probe_left_ = 0;
  int probe_used_ = 0;
  Eigen::Vector3d probe_sum_ = Eigen::Vector3d::Zero();

  PegCommand decide(const Wrench& settled);
};

struct PegEpisodeConfig {
  PegHoleScene scene;
  PegControllerParams controller;
  SensorChainConfig sensor;
  int max_steps = 5000;
  double max_penetration = 1e-4;  // m, deeper interpenetration voids the episode

  void validate() const;
};

PegEpisodeConfig reference_peg_episode();

struct PegStepRecord {
  double t;
  PegCommand command;
  ContactState state;
  Wrench estimate;
  TaskWrench truth;
  PegPose pose;
};

struct PegEpisodeResult {
  bool success = false;
  int steps = 0;
  double max_force = 0.0;   // N, largest true |F|
  double max_moment = 0.0;  // N m, largest true |M|
  double max_penetration = 0.0;  // m, deepest true interpenetration
  PegPose initial;
  std::vector<PegStepRecord> records;
};

/// Random initial offset and tilt within the scene bounds.
PegPose random_peg_start(const PegHoleScene& scene, std::uint64_t seed);

PegEpisodeResult run_peg_episode(const PegEpisodeConfig& config, std::uint64_t seed, bool keep_records = true);

void write_peg_csv(const PegEpisodeResult& result, std::ostream& out);
nlohmann::json peg_summary_json(const PegEpisodeResult& result);

}  // namespace hdyn
