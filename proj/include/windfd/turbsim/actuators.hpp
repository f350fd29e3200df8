#pragma once

namespace windfd::turbsim {

/// One step of the generator/converter lag  d(tau_g)/dt = a*(tau_ref - tau_g)
/// with the reference held over the step. The update is the exact
/// zero-order-hold solution, so it is unconditionally stable for any dt.
double step_generator(double torque, double torque_reference, double dt,
                      double converter_bandwidth = 50.0);

/// Generator torque a time `elapsed` after the start of a held-reference step.
inline double generator_torque_at(double torque, double torque_reference, double elapsed,
                                  double converter_bandwidth = 50.0) {
  return step_generator(torque, torque_reference, elapsed, converter_bandwidth);
}

/// P_g = eta_g * omega_g * tau_g
double generator_power(double generator_speed, double generator_torque,
                       double efficiency = 0.98);

struct PitchState {
  double angle = 0.0;  // deg
  double rate = 0.0;   // deg/s
};

/// One exact step of  beta'' + 2 zeta wn beta' + wn^2 beta = wn^2 beta_c  with
/// the command held. Handles under-, critically and over-damped cases.
/// Throws std::invalid_argument for non-positive damping or natural frequency.
PitchState step_pitch_actuator(PitchState state, double command, double damping,
                               double natural_freq, double dt);

}  // namespace windfd::turbsim
