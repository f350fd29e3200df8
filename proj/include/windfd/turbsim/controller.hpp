#pragma once

namespace windfd::turbsim {

/// Baseline torque and gain-scheduled PI pitch controller settings.
///
/// Gains are expressed at zero pitch in degrees of pitch per rad/s (kp) and
/// per rad (ki) of generator-speed error. Both are scaled by
/// 1 / (1 + beta / schedule_knee_deg), beta being the measured collective
/// pitch. The defaults place the speed loop near 1.0 rad/s, critically
/// damped, at the 18.2 m/s operating point of the surrogate rotor.
struct ControllerConfig {
  double filter_corner_hz = 0.25;
  double kp = 7.142857;
  double ki = 5.277778;
  double schedule_knee_deg = 6.3;
  double speed_floor = 1.0;        // rad/s, guards the torque law at zero speed
  double torque_max = 47402.91;    // Nm
  double pitch_min = 0.0;          // deg
  double pitch_max = 90.0;         // deg

  void validate() const;
};

/// First-order low-pass on the measured generator speed.
class SpeedFilter {
 public:
  SpeedFilter(double corner_hz, double initial) : corner_hz_(corner_hz), value_(initial) {}

  double update(double measured, double dt);
  double value() const { return value_; }

 private:
  double corner_hz_;
  double value_;
};

/// tau_gr = P_ref / max(w_hat, floor), clamped to [0, torque_max].
double torque_controller(const ControllerConfig& config, double power_reference,
                         double filtered_speed);

double gain_schedule(const ControllerConfig& config, double pitch_deg);

struct PitchCommand {
  double command = 0.0;     // deg
  double integrator = 0.0;  // deg, already includes the integral gain
};

/// Gain-scheduled PI:  beta_c = GK*(kp*e) + I,  I' = I + GK*ki*e*dt,
/// e = w_hat - w_ref. Integrator and output are clamped to the pitch range.
PitchCommand pitch_controller(const ControllerConfig& config, double filtered_speed,
                              double speed_reference, double integrator,
                              double schedule_pitch_deg, double dt);

}  // namespace windfd::turbsim
