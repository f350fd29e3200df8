#include "windfd/turbsim/fault.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace windfd::turbsim {
namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "healthy",         "f1-high-air",      "f2-pump-wear",    "f3-hydraulic-leak",
    "f4-gen-speed-gain", "f5-pitch-fixed-10", "f6-pitch-fixed-5", "f7-torque-offset"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

FaultKind fault_from_label(int label) {
  if (label < 0 || label >= kNumClasses)
    throw std::invalid_argument("unknown fault label " + std::to_string(label));
  return static_cast<FaultKind>(label);
}

std::string_view fault_name(FaultKind kind) {
  const int idx = static_cast<int>(kind);
  if (idx < 0 || idx >= kNumClasses)
    throw std::invalid_argument("unknown fault kind " + std::to_string(idx));
  return kNames[static_cast<std::size_t>(idx)];
}

FaultKind parse_fault_kind(std::string_view text) {
  const std::string t = lower(text);
  for (int i = 0; i < kNumClasses; ++i)
    if (t == kNames[static_cast<std::size_t>(i)]) return static_cast<FaultKind>(i);
  if (t == "h" || t == "none") return FaultKind::Healthy;
  if (t.size() == 2 && t[0] == 'f' && t[1] >= '1' && t[1] <= '7')
    return static_cast<FaultKind>(t[1] - '0');
  if (t.size() == 1 && t[0] >= '0' && t[0] <= '7') return static_cast<FaultKind>(t[0] - '0');
  throw std::invalid_argument("unknown fault scenario '" + std::string(text) + "'");
}

bool is_actuator_fault(FaultKind kind) {
  return kind == FaultKind::HighAirContent || kind == FaultKind::PumpWear ||
         kind == FaultKind::HydraulicLeakage;
}

bool is_sensor_fault(FaultKind kind) {
  return kind == FaultKind::GeneratorSpeedGain || kind == FaultKind::PitchSensorFixed10 ||
         kind == FaultKind::PitchSensorFixed5;
}

FaultScenario FaultScenario::make(FaultKind kind) {
  FaultScenario s;
  s.kind = kind;
  switch (kind) {
    case FaultKind::Healthy: break;
    case FaultKind::HighAirContent:
      s.pitch_damping = 0.45;
      s.pitch_natural_freq = 5.73;
      s.blade = 1;
      break;
    case FaultKind::PumpWear:
      s.pitch_damping = 0.75;
      s.pitch_natural_freq = 7.27;
      s.blade = 1;
      break;
    case FaultKind::HydraulicLeakage:
      s.pitch_damping = 0.9;
      s.pitch_natural_freq = 3.42;
      s.blade = 1;
      break;
    case FaultKind::GeneratorSpeedGain: s.sensor_gain = 1.2; break;
    case FaultKind::PitchSensorFixed10:
      s.fixed_pitch_value = 10.0;
      s.blade = 0;
      break;
    case FaultKind::PitchSensorFixed5:
      s.fixed_pitch_value = 5.0;
      s.blade = 0;
      break;
    case FaultKind::TorqueOffset: s.torque_offset = 2000.0; break;
    default: throw std::invalid_argument("unknown fault kind " + std::to_string(static_cast<int>(kind)));
  }
  return s;
}

void FaultScenario::validate(double duration) const {
  const int idx = static_cast<int>(kind);
  if (idx < 0 || idx >= kNumClasses)
    throw std::invalid_argument("unknown fault kind " + std::to_string(idx));
  const bool actuator = is_actuator_fault(kind);
  const bool stuck = kind == FaultKind::PitchSensorFixed10 || kind == FaultKind::PitchSensorFixed5;
  auto expect = [&](bool present, bool wanted, const char* field) {
    if (present != wanted)
      throw std::invalid_argument(std::string("fault ") + std::string(fault_name(kind)) +
                                  (wanted ? " requires '" : " must not carry '") + field + "'");
  };
  expect(pitch_damping.has_value(), actuator, "pitch_damping");
  expect(pitch_natural_freq.has_value(), actuator, "pitch_natural_freq");
  expect(sensor_gain.has_value(), kind == FaultKind::GeneratorSpeedGain, "sensor_gain");
  expect(fixed_pitch_value.has_value(), stuck, "fixed_pitch_value");
  expect(torque_offset.has_value(), kind == FaultKind::TorqueOffset, "torque_offset");
  expect(blade.has_value(), actuator || stuck, "blade");
  if (kind == FaultKind::Healthy && interval.has_value())
    throw std::invalid_argument("healthy scenario must not carry an active interval");
  if (actuator && (!(*pitch_damping > 0.0) || !(*pitch_natural_freq > 0.0)))
    throw std::invalid_argument("actuator fault parameters must be positive");
  if (blade && (*blade < 0 || *blade > 2)) throw std::invalid_argument("blade index must be 0..2");
  if (interval && (interval->start < 0.0 || interval->end > duration || interval->start > interval->end))
    throw std::invalid_argument("fault interval must lie within [0, duration]");
}

ActuatorParams ActuatorParams::nominal(double damping, double natural_freq) {
  ActuatorParams p;
  p.pitch_damping.fill(damping);
  p.pitch_natural_freq.fill(natural_freq);
  return p;
}

FaultEffect apply_fault(const SensorReadings& truth, const ActuatorParams& nominal,
                        const FaultScenario& scenario, double t) {
  FaultEffect out{truth, nominal};
  const int idx = static_cast<int>(scenario.kind);
  if (idx < 0 || idx >= kNumClasses)
    throw std::invalid_argument("unknown fault kind " + std::to_string(idx));
  if (!scenario.active_at(t)) return out;

  switch (scenario.kind) {
    case FaultKind::Healthy: break;
    case FaultKind::HighAirContent:
    case FaultKind::PumpWear:
    case FaultKind::HydraulicLeakage: {
      const auto b = static_cast<std::size_t>(scenario.blade.value_or(1));
      out.params.pitch_damping[b] = *scenario.pitch_damping;
      out.params.pitch_natural_freq[b] = *scenario.pitch_natural_freq;
      break;
    }
    case FaultKind::GeneratorSpeedGain:
      out.readings.generator_speed = truth.generator_speed * *scenario.sensor_gain;
      break;
    case FaultKind::PitchSensorFixed10:
    case FaultKind::PitchSensorFixed5:
      out.readings.pitch[static_cast<std::size_t>(scenario.blade.value_or(0))] =
          *scenario.fixed_pitch_value;
      break;
    case FaultKind::TorqueOffset: out.params.torque_offset = *scenario.torque_offset; break;
  }
  return out;
}

}  // namespace windfd::turbsim
