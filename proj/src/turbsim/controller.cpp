#include "windfd/turbsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace windfd::turbsim {

void ControllerConfig::validate() const {
  if (!(filter_corner_hz > 0.0)) throw std::invalid_argument("filter_corner_hz must be positive");
  if (!(kp >= 0.0) || !(ki >= 0.0)) throw std::invalid_argument("controller gains must be >= 0");
  if (!(schedule_knee_deg > 0.0)) throw std::invalid_argument("schedule_knee_deg must be positive");
  if (!(speed_floor > 0.0)) throw std::invalid_argument("speed_floor must be positive");
  if (!(torque_max > 0.0)) throw std::invalid_argument("torque_max must be positive");
  if (!(pitch_min < pitch_max)) throw std::invalid_argument("pitch_min must be below pitch_max");
}

double SpeedFilter::update(double measured, double dt) {
  const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * corner_hz_ * dt);
  value_ += alpha * (measured - value_);
  return value_;
}

double torque_controller(const ControllerConfig& config, double power_reference,
                         double filtered_speed) {
  const double speed = std::max(filtered_speed, config.speed_floor);
  return std::clamp(power_reference / speed, 0.0, config.torque_max);
}

double gain_schedule(const ControllerConfig& config, double pitch_deg) {
  return 1.0 / (1.0 + std::max(pitch_deg, 0.0) / config.schedule_knee_deg);
}

PitchCommand pitch_controller(const ControllerConfig& config, double filtered_speed,
                              double speed_reference, double integrator,
                              double schedule_pitch_deg, double dt) {
  const double error = filtered_speed - speed_reference;
  const double gk = gain_schedule(config, schedule_pitch_deg);
  const double next = std::clamp(integrator + gk * config.ki * error * dt, config.pitch_min,
                                 config.pitch_max);
  const double command = std::clamp(gk * config.kp * error + next, config.pitch_min,
                                    config.pitch_max);
  return {command, next};
}

}  // namespace windfd::turbsim
