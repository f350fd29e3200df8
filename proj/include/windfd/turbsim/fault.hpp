#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace windfd::turbsim {

/// Class labels 0..7; the numeric value is the label used throughout.
enum class FaultKind : int {
  Healthy = 0,
  HighAirContent = 1,     // pitch actuator, zeta=0.45, wn=5.73
  PumpWear = 2,           // pitch actuator, zeta=0.75, wn=7.27
  HydraulicLeakage = 3,   // pitch actuator, zeta=0.9,  wn=3.42
  GeneratorSpeedGain = 4, // generator speed sensor, gain 1.2
  PitchSensorFixed10 = 5, // pitch angle sensor stuck at 10 deg
  PitchSensorFixed5 = 6,  // pitch angle sensor stuck at 5 deg
  TorqueOffset = 7,       // torque actuator, +2000 Nm
};

inline constexpr int kNumClasses = 8;

/// "healthy", "f1-high-air", ... ; also accepts "F1".."F7" and "0".."7".
FaultKind parse_fault_kind(std::string_view text);
std::string_view fault_name(FaultKind kind);
/// Throws std::invalid_argument for integers outside 0..7.
FaultKind fault_from_label(int label);

bool is_actuator_fault(FaultKind kind);
bool is_sensor_fault(FaultKind kind);

struct ActiveInterval {
  double start = 0.0;
  double end = 0.0;
  bool contains(double t) const { return t >= start && t <= end; }
};

/// A fault with exactly the overrides its kind needs. `interval` absent means
/// the fault is active for the whole run.
struct FaultScenario {
  FaultKind kind = FaultKind::Healthy;
  std::optional<double> pitch_damping;
  std::optional<double> pitch_natural_freq;
  std::optional<double> sensor_gain;
  std::optional<double> fixed_pitch_value;
  std::optional<double> torque_offset;
  std::optional<int> blade;  // 0-based; actuator faults and stuck pitch sensors
  std::optional<ActiveInterval> interval;

  /// Canonical parameters for `kind`. Actuator faults default to blade 2
  /// (index 1) and stuck pitch sensors to blade 1 (index 0).
  static FaultScenario make(FaultKind kind);

  bool active_at(double t) const { return kind != FaultKind::Healthy && (!interval || interval->contains(t)); }

  /// Throws std::invalid_argument if fields do not match `kind` or the
  /// interval does not fit in [0, duration].
  void validate(double duration) const;
};

/// What the sensors report. Index order of `pitch` is blade 1..3.
struct SensorReadings {
  double rotor_speed = 0.0;        // rad/s
  double generator_speed = 0.0;    // rad/s
  double generator_torque = 0.0;   // Nm
  std::array<double, 3> pitch{};   // deg
};

/// Parameters of the actuators as seen by the plant.
struct ActuatorParams {
  std::array<double, 3> pitch_damping{};
  std::array<double, 3> pitch_natural_freq{};
  double torque_offset = 0.0;  // Nm added to the converter input

  static ActuatorParams nominal(double damping, double natural_freq);
};

struct FaultEffect {
  SensorReadings readings;
  ActuatorParams params;
};

/// Applies `scenario` at time t. Actuator faults touch only the parameters,
/// sensor faults only the readings; inactive or healthy scenarios are identity.
FaultEffect apply_fault(const SensorReadings& truth, const ActuatorParams& nominal,
                        const FaultScenario& scenario, double t);

}  // namespace windfd::turbsim
