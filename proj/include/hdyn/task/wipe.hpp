#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdyn/sense/virtual_sensor.hpp"
#include "hdyn/task/sensor_chain.hpp"

namespace hdyn {

/// Compliant surface under a wiping tool, task frame z pointing down into it.
struct WipeSurface {
  double stiffness = 2e4;        // N/m
  double ramp_start = 0.15;      // m along x
  double ramp_length = 0.05;     // m
  double ramp_height = 0.0;      // m, the surface rises by this much (toward -z)

  void validate() const;
  double height(double x) const;  // surface z at x
};

/// Delta z = g_p (target - F_Z_hat), with positive z pressing harder.
double wipe_controller(double target_fz, const Wrench& estimate, double gain);

struct WipeConfig {
  WipeSurface surface;
  SensorChainConfig sensor;
  double target_fz = 60.0;       // N
  double gain = 2e-6;            // m/N
  double speed = 0.05;           // m/s along x
  double start_gap = 0.001;      // m above the surface
  double dt = 0.008;             // s
  int steps = 5000;
  double max_step = 5e-4;        // m per decision

  void validate() const;
};

WipeConfig reference_wipe();

struct WipeRun {
  std::vector<double> t, x, z, fz_true, fz_hat;
};

WipeRun run_wipe(const WipeConfig& config, std::uint64_t seed);

/// Mean |F_Z - target| over samples with t >= t_from.
double wipe_force_mae(const WipeRun& run, double target, double t_from);

/// Last time |F_Z - target| left the band, or the first sample if it never did.
double wipe_recovery_time(const WipeRun& run, double target, double band, double t_from);

void write_wipe_csv(const WipeRun& run, std::ostream& out);

}  // namespace hdyn
