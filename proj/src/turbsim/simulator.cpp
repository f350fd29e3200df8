#include "windfd/turbsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "windfd/common/errors.hpp"
#include "windfd/turbsim/actuators.hpp"
#include "windfd/turbsim/rotor.hpp"

namespace windfd::turbsim {

void SimulatorConfig::validate() const {
  turbine.validate();
  controller.validate();
  if (!(internal_dt > 0.0 && internal_dt <= 0.05))
    throw std::invalid_argument("internal_dt must lie in (0, 0.05]");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be positive");
  steps_per_sample();
}

int SimulatorConfig::steps_per_sample() const {
  const double ratio = 1.0 / (sample_rate * internal_dt);
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9)
    throw std::invalid_argument("sample period must be an integer multiple of internal_dt");
  return static_cast<int>(steps);
}

namespace {

double mean3(const std::array<double, 3>& v) { return (v[0] + v[1] + v[2]) / 3.0; }

bool finite_state(const TurbineState& s) {
  bool ok = std::isfinite(s.rotor_speed) && std::isfinite(s.generator_torque) &&
            std::isfinite(s.filtered_generator_speed) && std::isfinite(s.integrator);
  for (int b = 0; b < 3; ++b) ok = ok && std::isfinite(s.pitch[b]) && std::isfinite(s.pitch_rate[b]);
  return ok;
}

}  // namespace

SensorTrace run_simulation(const SimulatorConfig& config, const FaultScenario& scenario,
                           const WindProfile& wind, double duration_s,
                           const std::string& run_id) {
  config.validate();
  scenario.validate(duration_s);
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  const double samples_real = duration_s * config.sample_rate;
  const long n_samples = std::lround(samples_real);
  if (std::abs(samples_real - static_cast<double>(n_samples)) > 1e-6 || n_samples < 1)
    throw std::invalid_argument("duration x sample_rate must be an integer sample count");
  if (wind.samples.size() < 2 || wind.duration() + 1e-9 < duration_s)
    throw std::invalid_argument("wind profile does not cover the run duration");

  const TurbineParams& tp = config.turbine;
  const ControllerConfig& cc = config.controller;
  const double dt = config.internal_dt;
  const int steps_per_sample = config.steps_per_sample();
  const double n_gear = tp.gearbox_ratio;
  const double speed_reference = tp.nominal_generator_speed();
  const double power_reference = tp.rated_power;
  const ActuatorParams nominal = ActuatorParams::nominal(tp.pitch_damping, tp.pitch_natural_freq);

  // Start trimmed at nominal speed for the initial wind.
  TurbineState s;
  s.rotor_speed = tp.nominal_rotor_speed();
  s.generator_speed = n_gear * s.rotor_speed;
  s.generator_torque = torque_controller(cc, power_reference, s.generator_speed);
  const double beta0 = trim_pitch(tp, wind.at(0.0), s.rotor_speed, power_reference);
  s.pitch.fill(beta0);
  s.pitch_rate.fill(0.0);
  s.integrator = std::clamp(beta0, cc.pitch_min, cc.pitch_max);
  s.pitch_command = s.integrator;

  SensorTrace trace;
  trace.run_id = run_id;
  trace.scenario = scenario;
  trace.sample_rate = config.sample_rate;
  trace.wind_seed = wind.seed;
  trace.values.reserve(static_cast<std::size_t>(n_samples) * kNumChannels);
  if (config.record_states) trace.states.reserve(static_cast<std::size_t>(n_samples));

  auto truth_readings = [&](const TurbineState& st) {
    SensorReadings r;
    r.rotor_speed = st.rotor_speed;
    r.generator_speed = st.generator_speed;
    r.generator_torque = st.generator_torque;
    r.pitch = st.pitch;
    return r;
  };

  bool filter_ready = false;
  SpeedFilter filter(cc.filter_corner_hz, 0.0);
  const long total_steps = n_samples * steps_per_sample;

  for (long k = 0; k < total_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    s.generator_speed = n_gear * s.rotor_speed;
    const SensorReadings truth = truth_readings(s);
    const FaultEffect effect = apply_fault(truth, nominal, scenario, t);
    const SensorReadings& measured = config.sensor_faults_feed_controller ? effect.readings : truth;

    s.measured_generator_speed = effect.readings.generator_speed;
    if (!filter_ready) {
      filter = SpeedFilter(cc.filter_corner_hz, measured.generator_speed);
      filter_ready = true;
    }
    s.filtered_generator_speed = filter.update(measured.generator_speed, dt);

    s.torque_demand = torque_controller(cc, power_reference, s.filtered_generator_speed);
    s.torque_reference = s.torque_demand + effect.params.torque_offset;
    const PitchCommand pc = pitch_controller(cc, s.filtered_generator_speed, speed_reference,
                                             s.integrator, mean3(measured.pitch), dt);
    s.pitch_command = pc.command;
    s.integrator = pc.integrator;
    s.generator_power = generator_power(s.generator_speed, s.generator_torque, tp.generator_efficiency);

    if (k % steps_per_sample == 0) {
      const SensorReadings& out = effect.readings;
      trace.values.push_back(out.rotor_speed);
      trace.values.push_back(out.generator_torque);
      trace.values.push_back(out.pitch[0]);
      trace.values.push_back(out.pitch[1]);
      trace.values.push_back(out.pitch[2]);
      if (config.record_states) trace.states.push_back(s);
    }

    // Actuators have exact held-input solutions; evaluate them at the RK4
    // stage times so the rotor sees a consistent torque and pitch history.
    auto pitch_at = [&](double elapsed) {
      std::array<double, 3> beta{};
      for (std::size_t b = 0; b < 3; ++b) {
        if (elapsed == 0.0) {
          beta[b] = s.pitch[b];
        } else {
          const PitchState ps = step_pitch_actuator({s.pitch[b], s.pitch_rate[b]}, s.pitch_command,
                                                    effect.params.pitch_damping[b],
                                                    effect.params.pitch_natural_freq[b], elapsed);
          beta[b] = std::clamp(ps.angle, cc.pitch_min, cc.pitch_max);
        }
      }
      return beta;
    };
    auto torque_at = [&](double elapsed) {
      return step_generator(s.generator_torque, s.torque_reference, elapsed, tp.converter_bandwidth);
    };
    auto accel = [&](double elapsed, double w) {
      if (!(w > 0.0) || !std::isfinite(w))
        throw SimulationDiverged(run_id, t + elapsed, "rotor speed left the positive range");
      const auto beta = pitch_at(elapsed);
      return rotor_acceleration(tp, wind.at(t + elapsed), w, beta, torque_at(elapsed));
    };
    const double w0 = s.rotor_speed;
    const double k1 = accel(0.0, w0);
    const double k2 = accel(0.5 * dt, w0 + 0.5 * dt * k1);
    const double k3 = accel(0.5 * dt, w0 + 0.5 * dt * k2);
    const double k4 = accel(dt, w0 + dt * k3);
    s.rotor_speed = w0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s.generator_torque = torque_at(dt);
    for (std::size_t b = 0; b < 3; ++b) {
      PitchState ps = step_pitch_actuator({s.pitch[b], s.pitch_rate[b]}, s.pitch_command,
                                          effect.params.pitch_damping[b],
                                          effect.params.pitch_natural_freq[b], dt);
      if (ps.angle < cc.pitch_min || ps.angle > cc.pitch_max) {
        ps.angle = std::clamp(ps.angle, cc.pitch_min, cc.pitch_max);
        ps.rate = 0.0;
      }
      s.pitch[b] = ps.angle;
      s.pitch_rate[b] = ps.rate;
    }
    if (!finite_state(s) || !(s.rotor_speed > 0.0))
      throw SimulationDiverged(run_id, t + dt, "non-finite or non-positive state");
  }
  return trace;
}

}  // namespace windfd::turbsim
