#include "windfd/turbsim/actuators.hpp"

#include <cmath>
#include <stdexcept>

namespace windfd::turbsim {

double step_generator(double torque, double torque_reference, double dt,
                      double converter_bandwidth) {
  return torque_reference + (torque - torque_reference) * std::exp(-converter_bandwidth * dt);
}

double generator_power(double generator_speed, double generator_torque, double efficiency) {
  return efficiency * generator_speed * generator_torque;
}

PitchState step_pitch_actuator(PitchState state, double command, double damping,
                               double natural_freq, double dt) {
  if (!(damping > 0.0)) throw std::invalid_argument("pitch actuator damping must be positive");
  if (!(natural_freq > 0.0))
    throw std::invalid_argument("pitch actuator natural frequency must be positive");

  const double x0 = state.angle - command;
  const double v0 = state.rate;
  const double wn = natural_freq;
  const double z = damping;
  double x = 0.0;
  double v = 0.0;

  if (std::abs(z - 1.0) < 1e-9) {
    const double e = std::exp(-wn * dt);
    const double k = v0 + wn * x0;
    x = e * (x0 + k * dt);
    v = e * (v0 - wn * k * dt);
  } else if (z < 1.0) {
    const double wd = wn * std::sqrt(1.0 - z * z);
    const double e = std::exp(-z * wn * dt);
    const double c = std::cos(wd * dt);
    const double s = std::sin(wd * dt);
    x = e * (x0 * c + (v0 + z * wn * x0) / wd * s);
    v = e * (v0 * c - (wn * wn * x0 + z * wn * v0) / wd * s);
  } else {
    const double root = wn * std::sqrt(z * z - 1.0);
    const double r1 = -z * wn + root;
    const double r2 = -z * wn - root;
    const double a = (v0 - r2 * x0) / (r1 - r2);
    const double b = x0 - a;
    const double e1 = std::exp(r1 * dt);
    const double e2 = std::exp(r2 * dt);
    x = a * e1 + b * e2;
    v = r1 * a * e1 + r2 * b * e2;
  }
  return {x + command, v};
}

}  // namespace windfd::turbsim
