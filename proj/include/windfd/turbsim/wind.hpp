#pragma once

#include <cstdint>
#include <vector>

namespace windfd::turbsim {

/// Kaimal point spectrum of the longitudinal component,
///   S(f) = sigma^2 * (4 L/U) / (1 + 6 f L/U)^(5/3),
/// with the integral scale L = 8.1 * 42 m used for hub heights above 60 m.
struct KaimalSpectrum {
  double integral_scale = 8.1 * 42.0;  // m

  double operator()(double frequency_hz, double mean_speed, double sigma) const;
};

/// Hub-height wind speed series sampled every `dt` seconds.
struct WindProfile {
  std::vector<double> samples;  // m/s
  double dt = 0.0;
  std::uint64_t seed = 0;
  double target_mean = 0.0;
  double turbulence_intensity = 0.0;

  double duration() const { return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1); }
  /// Linear interpolation; clamps outside the covered range.
  double at(double t) const;
};

/// Spectral synthesis: deterministic Kaimal amplitudes with uniform random
/// phases, inverse FFT, then exact rescaling to the target mean and
/// standard deviation TI*mean. Produces round(duration/dt)+1 samples.
/// Throws std::invalid_argument for non-positive duration, dt or mean, or TI < 0.
WindProfile generate_wind(std::uint64_t seed, double duration_s, double dt, double mean_speed,
                          double turbulence_intensity, const KaimalSpectrum& spectrum = {});

}  // namespace windfd::turbsim
