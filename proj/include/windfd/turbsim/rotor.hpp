#pragma once

#include <span>

#include "windfd/turbsim/turbine_params.hpp"

namespace windfd::turbsim {

/// Aerodynamic torque on the low-speed shaft for one collective pitch.
double aerodynamic_torque(const TurbineParams& params, double wind_speed, double rotor_speed,
                          double pitch_deg);

/// Aerodynamic torque with each blade contributing a third of the rotor at its
/// own pitch angle.
double aerodynamic_torque(const TurbineParams& params, double wind_speed, double rotor_speed,
                          std::span<const double> blade_pitch_deg);

/// d(omega_r)/dt = (tau_aero - N*tau_g) / J
double rotor_acceleration(const TurbineParams& params, double wind_speed, double rotor_speed,
                          std::span<const double> blade_pitch_deg, double generator_torque);

/// One RK4 step of the one-degree-of-freedom drivetrain with wind, pitch and
/// generator torque held. Throws SimulationDiverged when the rotor speed is
/// (or becomes) non-positive or non-finite, and std::invalid_argument when the
/// wind lies outside [0.5, 40] m/s.
double step_rotor(const TurbineParams& params, double rotor_speed, double wind_speed,
                  double pitch_collective_deg, double generator_torque, double dt);

/// Collective pitch at which the rotor absorbs `power` at `rotor_speed`;
/// returns 0 when even zero pitch cannot reach it.
double trim_pitch(const TurbineParams& params, double wind_speed, double rotor_speed,
                  double power);

}  // namespace windfd::turbsim
