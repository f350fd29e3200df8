#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "windfd/turbsim/controller.hpp"
#include "windfd/turbsim/fault.hpp"
#include "windfd/turbsim/turbine_params.hpp"
#include "windfd/turbsim/wind.hpp"

namespace windfd::turbsim {

inline constexpr int kNumChannels = 5;
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "rotor_speed", "generator_torque", "pitch1", "pitch2", "pitch3"};
inline constexpr std::array<const char*, kNumChannels> kChannelUnits = {"rad/s", "Nm", "deg", "deg",
                                                                        "deg"};

struct SimulatorConfig {
  TurbineParams turbine{};
  ControllerConfig controller{};
  double internal_dt = 1.0 / 160.0;
  double sample_rate = 80.0;
  /// Sensor faults corrupt the measurement the controllers act on. With this
  /// off they only alter the recorded channels and the plant trajectory is
  /// the healthy one.
  bool sensor_faults_feed_controller = true;
  /// Keep the full TurbineState at every recorded sample.
  bool record_states = false;

  void validate() const;
  int steps_per_sample() const;
};

struct TurbineState {
  double rotor_speed = 0.0;               // rad/s
  double generator_speed = 0.0;           // rad/s, gearbox_ratio * rotor_speed
  double measured_generator_speed = 0.0;  // rad/s, reading after sensor faults
  double filtered_generator_speed = 0.0;  // rad/s
  double generator_torque = 0.0;          // Nm
  double torque_demand = 0.0;             // Nm, torque controller output
  double torque_reference = 0.0;          // Nm, converter input
  std::array<double, 3> pitch{};          // deg
  std::array<double, 3> pitch_rate{};     // deg/s
  double pitch_command = 0.0;             // deg
  double generator_power = 0.0;           // W
  double integrator = 0.0;                // deg
};

/// One simulated run: 5 channels at `sample_rate`, row-major T x 5.
struct SensorTrace {
  std::string run_id;
  FaultScenario scenario;
  double sample_rate = 80.0;
  std::uint64_t wind_seed = 0;
  std::vector<double> values;
  std::vector<TurbineState> states;  // only with SimulatorConfig::record_states

  int label() const { return static_cast<int>(scenario.kind); }
  std::size_t rows() const { return values.size() / kNumChannels; }
  double at(std::size_t row, int channel) const {
    return values[row * kNumChannels + static_cast<std::size_t>(channel)];
  }
};

/// Integrates the closed loop over `duration_s` and samples the five sensor
/// channels at exactly `sample_rate`. Deterministic in its inputs. Throws
/// SimulationDiverged with the run id and time on a non-finite state, and
/// std::invalid_argument when the wind does not cover the run or the sample
/// count is not an integer.
SensorTrace run_simulation(const SimulatorConfig& config, const FaultScenario& scenario,
                           const WindProfile& wind, double duration_s = 600.0,
                           const std::string& run_id = "run");

}  // namespace windfd::turbsim
