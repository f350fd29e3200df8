#include "windfd/turbsim/wind.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "windfd/common/random.hpp"

namespace windfd::turbsim {

double KaimalSpectrum::operator()(double f, double mean_speed, double sigma) const {
  const double ratio = integral_scale / mean_speed;
  return sigma * sigma * 4.0 * ratio / std::pow(1.0 + 6.0 * f * ratio, 5.0 / 3.0);
}

double WindProfile::at(double t) const {
  if (samples.empty()) return 0.0;
  const double pos = t / dt;
  if (pos <= 0.0) return samples.front();
  const auto last = static_cast<double>(samples.size() - 1);
  if (pos >= last) return samples.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return samples[i] + frac * (samples[i + 1] - samples[i]);
}

WindProfile generate_wind(std::uint64_t seed, double duration_s, double dt, double mean_speed,
                          double turbulence_intensity, const KaimalSpectrum& spectrum) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("wind duration must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("wind dt must be positive");
  if (!(mean_speed > 0.0)) throw std::invalid_argument("mean wind speed must be positive");
  if (!(turbulence_intensity >= 0.0))
    throw std::invalid_argument("turbulence intensity must be non-negative");

  WindProfile wind;
  wind.dt = dt;
  wind.seed = seed;
  wind.target_mean = mean_speed;
  wind.turbulence_intensity = turbulence_intensity;
  const auto n = static_cast<std::size_t>(std::llround(duration_s / dt)) + 1;
  wind.samples.assign(n, mean_speed);
  if (turbulence_intensity == 0.0 || n < 3) return wind;

  const double sigma = turbulence_intensity * mean_speed;
  const std::size_t bins = n / 2 + 1;
  const double df = 1.0 / (static_cast<double>(n) * dt);
  Rng rng(derive_seed(seed, "wind-phases"));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> spec_guard(spec, &fftw_free);
  std::vector<double> series(n);
  spec[0][0] = 0.0;
  spec[0][1] = 0.0;
  for (std::size_t k = 1; k < bins; ++k) {
    const double phi = phase(rng);
    const bool nyquist = (n % 2 == 0) && k == n / 2;
    const double amp = nyquist ? 0.0 : std::sqrt(2.0 * spectrum(static_cast<double>(k) * df, mean_speed, sigma) * df);
    spec[k][0] = 0.5 * amp * std::cos(phi);
    spec[k][1] = 0.5 * amp * std::sin(phi);
  }
  fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, series.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (!(sd > 0.0)) return wind;
  for (std::size_t i = 0; i < n; ++i) wind.samples[i] = mean_speed + (series[i] - mean) * (sigma / sd);
  return wind;
}

}  // namespace windfd::turbsim
