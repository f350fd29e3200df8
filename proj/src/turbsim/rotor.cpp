#include "windfd/turbsim/rotor.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "windfd/common/errors.hpp"

namespace windfd::turbsim {

double aerodynamic_torque(const TurbineParams& params, double wind_speed, double rotor_speed,
                          double pitch_deg) {
  const double lambda = rotor_speed * params.rotor_radius() / wind_speed;
  const double cp = params.power_coefficient(lambda, pitch_deg);
  const double power = 0.5 * params.air_density * params.swept_area() * wind_speed * wind_speed *
                       wind_speed * cp;
  return power / rotor_speed;
}

double aerodynamic_torque(const TurbineParams& params, double wind_speed, double rotor_speed,
                          std::span<const double> blade_pitch_deg) {
  double sum = 0.0;
  for (double beta : blade_pitch_deg) sum += aerodynamic_torque(params, wind_speed, rotor_speed, beta);
  return sum / static_cast<double>(blade_pitch_deg.size());
}

double rotor_acceleration(const TurbineParams& params, double wind_speed, double rotor_speed,
                          std::span<const double> blade_pitch_deg, double generator_torque) {
  const double aero = aerodynamic_torque(params, wind_speed, rotor_speed, blade_pitch_deg);
  return (aero - params.gearbox_ratio * generator_torque) / params.rotor_inertia;
}

double step_rotor(const TurbineParams& params, double rotor_speed, double wind_speed,
                  double pitch_collective_deg, double generator_torque, double dt) {
  if (!(wind_speed >= 0.5 && wind_speed <= 40.0))
    throw std::invalid_argument("wind speed outside [0.5, 40] m/s");
  if (!(rotor_speed > 0.0) || !std::isfinite(rotor_speed))
    throw SimulationDiverged("step_rotor", 0.0, "rotor speed must be positive");

  const std::array<double, 1> pitch{pitch_collective_deg};
  auto accel = [&](double w) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw SimulationDiverged("step_rotor", 0.0, "rotor speed left the positive range");
    return rotor_acceleration(params, wind_speed, w, pitch, generator_torque);
  };
  const double k1 = accel(rotor_speed);
  const double k2 = accel(rotor_speed + 0.5 * dt * k1);
  const double k3 = accel(rotor_speed + 0.5 * dt * k2);
  const double k4 = accel(rotor_speed + dt * k3);
  const double next = rotor_speed + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!(next > 0.0) || !std::isfinite(next))
    throw SimulationDiverged("step_rotor", 0.0, "rotor speed left the positive range");
  return next;
}

double trim_pitch(const TurbineParams& params, double wind_speed, double rotor_speed,
                  double power) {
  const double target = power / rotor_speed;
  auto excess = [&](double beta) {
    return aerodynamic_torque(params, wind_speed, rotor_speed, beta) - target;
  };
  double lo = 0.0;
  double hi = 45.0;
  if (excess(lo) <= 0.0) return 0.0;
  if (excess(hi) > 0.0) return hi;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace windfd::turbsim
