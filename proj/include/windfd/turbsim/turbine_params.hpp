#pragma once

#include <numbers>

namespace windfd::turbsim {

/// Analytic power-coefficient surface of the exponential family
///
///   1/lambda_i = 1/(lambda + c6*beta) - c7/(beta^3 + 1)
///   Cp = max(0, c1*(c2/lambda_i - c3*beta - c4) * exp(-c5/lambda_i))
///
/// with beta in degrees. The default coefficients were fitted once against
/// the 5-MW reference rotor so that rated power is reached near 11.4 m/s at
/// nominal rotor speed; the zero floor makes a feathered rotor produce no
/// torque.
struct PowerCoefficientSurface {
  double c1 = 0.1333;
  double c2 = 126.1;
  double c3 = 1.012;
  double c4 = 3.117;
  double c5 = 10.59;
  double c6 = 0.0405;
  double c7 = 0.00649;

  double operator()(double tip_speed_ratio, double pitch_deg) const;
};

/// Physical constants of the 5-MW benchmark turbine plus the surrogate
/// drivetrain inertia.
struct TurbineParams {
  double rated_power = 5.0e6;               // W
  double gearbox_ratio = 98.0;              // -
  double rotor_diameter = 126.0;            // m
  double cut_in_wind = 3.0;                 // m/s
  double rated_wind = 11.4;                 // m/s
  double cut_out_wind = 25.0;               // m/s
  double nominal_generator_speed_rpm = 1173.7;
  double generator_efficiency = 0.98;       // eta_g
  double converter_bandwidth = 50.0;        // alpha_gc, 1/s
  double pitch_damping = 0.7;               // zeta
  double pitch_natural_freq = 11.11;        // omega_n, rad/s
  // Low-speed-shaft inertia: rotor (38 759 228 kg m^2) plus N^2 times the
  // generator inertia (534.116 kg m^2).
  double rotor_inertia = 38'759'228.0 + 98.0 * 98.0 * 534.116;
  double air_density = 1.225;               // kg/m^3
  PowerCoefficientSurface power_coefficient{};

  double rotor_radius() const { return 0.5 * rotor_diameter; }
  double swept_area() const { return std::numbers::pi * rotor_radius() * rotor_radius(); }
  double nominal_generator_speed() const {
    return nominal_generator_speed_rpm * 2.0 * std::numbers::pi / 60.0;
  }
  double nominal_rotor_speed() const { return nominal_generator_speed() / gearbox_ratio; }

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

}  // namespace windfd::turbsim
