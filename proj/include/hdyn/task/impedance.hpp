#pragma once

namespace hdyn {

/// Discrete mass-damper rendering of a torque (or force) error.
struct ImpedanceParams {
  double m = 1.0;       // virtual mass
  double b = 10.0;      // virtual damping
  double k_tau = 0.01;  // displacement per unit error
  double k_v = 0.001;   // displacement per unit error rate
  double dt = 0.008;    // s

  void validate() const;
};

/// (k_tau e + k_v e / dt) / (m / dt^2 + b / dt). Linear in the error.
double impedance_displacement(const ImpedanceParams& p, double error);

}  // namespace hdyn
