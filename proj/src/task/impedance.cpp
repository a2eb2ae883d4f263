#include "hdyn/task/impedance.hpp"

#include "hdyn/common/errors.hpp"

namespace hdyn {

void ImpedanceParams::validate() const {
  require(m > 0.0 && b > 0.0 && dt > 0.0, "impedance: m, b and dt must be positive");
  require(k_tau >= 0.0 && k_v >= 0.0, "impedance: gains must be >= 0");
}

double impedance_displacement(const ImpedanceParams& p, double error) {
  p.validate();
  return (p.k_tau * error + p.k_v * error / p.dt) / (p.m / (p.dt * p.dt) + p.b / p.dt);
}

}  // namespace hdyn
