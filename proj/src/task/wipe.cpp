#include "hdyn/task/wipe.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hdyn/common/errors.hpp"

namespace hdyn {

void WipeSurface::validate() const {
  require(stiffness > 0.0, "WipeSurface: stiffness must be positive");
  require(ramp_length > 0.0, "WipeSurface: ramp length must be positive");
}

double WipeSurface::height(double x) const {
  const double s = std::clamp((x - ramp_start) / ramp_length, 0.0, 1.0);
  return -ramp_height * s;
}

double wipe_controller(double target_fz, const Wrench& estimate, double gain) {
  require(target_fz > 0.0, "wipe_controller: target force must be positive");
  // z points into the surface, so a shortfall pushes further in.
  return gain * (target_fz - estimate.f_z);
}

void WipeConfig::validate() const {
  surface.validate();
  sensor.validate();
  require(target_fz > 0.0 && gain > 0.0, "WipeConfig: target and gain must be positive");
  require(dt > 0.0 && steps >= 1 && max_step > 0.0, "WipeConfig: bad loop settings");
  require(start_gap >= 0.0, "WipeConfig: start gap must be >= 0");
}

WipeConfig reference_wipe() {
  WipeConfig c;
  c.sensor = reference_sensor_chain();
  c.sensor.tool_length = 0.05;
  return c;
}

WipeRun run_wipe(const WipeConfig& config, std::uint64_t seed) {
  config.validate();
  SensorChain sensor(config.sensor, seed);
  WipeRun run;
  double z = config.surface.height(0.0) - config.start_gap;
  for (int k = 0; k < config.steps; ++k) {
    const double t = k * config.dt;
    const double x = config.speed * t;
    const double fz = config.surface.stiffness * std::max(0.0, z - config.surface.height(x));
    TaskWrench truth;
    truth.force.z() = fz;
    const Wrench estimate = sensor.measure(truth);
    run.t.push_back(t);
    run.x.push_back(x);
    run.z.push_back(z);
    run.fz_true.push_back(fz);
    run.fz_hat.push_back(estimate.f_z);
    z += std::clamp(wipe_controller(config.target_fz, estimate, config.gain), -config.max_step, config.max_step);
  }
  return run;
}

double wipe_force_mae(const WipeRun& run, double target, double t_from) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] < t_from) continue;
    sum += std::abs(run.fz_true[k] - target);
    ++n;
  }
  require(n > 0, "wipe_force_mae: no samples after t_from");
  return sum / n;
}

double wipe_recovery_time(const WipeRun& run, double target, double band, double t_from) {
  double last = t_from;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] >= t_from && std::abs(run.fz_true[k] - target) > band) last = run.t[k];
  }
  return last;
}

void write_wipe_csv(const WipeRun& run, std::ostream& out) {
  out << "t,x,z,fz_true,fz_hat\n";
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    out << run.t[k] << ',' << run.x[k] << ',' << run.z[k] << ',' << run.fz_true[k] << ',' << run.fz_hat[k] << '\n';
  }
}

}  // namespace hdyn
