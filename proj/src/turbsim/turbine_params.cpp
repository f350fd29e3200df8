#include "windfd/turbsim/turbine_params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace windfd::turbsim {

double PowerCoefficientSurface::operator()(double tip_speed_ratio, double pitch_deg) const {
  const double inv_lambda_i =
      1.0 / (tip_speed_ratio + c6 * pitch_deg) - c7 / (pitch_deg * pitch_deg * pitch_deg + 1.0);
  const double cp = c1 * (c2 * inv_lambda_i - c3 * pitch_deg - c4) * std::exp(-c5 * inv_lambda_i);
  return std::max(cp, 0.0);
}

void TurbineParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("turbine parameter '") + name + "' must be positive");
  };
  require_positive(rated_power, "rated_power");
  require_positive(gearbox_ratio, "gearbox_ratio");
  require_positive(rotor_diameter, "rotor_diameter");
  require_positive(cut_in_wind, "cut_in_wind");
  require_positive(rated_wind, "rated_wind");
  require_positive(cut_out_wind, "cut_out_wind");
  require_positive(nominal_generator_speed_rpm, "nominal_generator_speed_rpm");
  require_positive(generator_efficiency, "generator_efficiency");
  require_positive(converter_bandwidth, "converter_bandwidth");
  require_positive(pitch_damping, "pitch_damping");
  require_positive(pitch_natural_freq, "pitch_natural_freq");
  require_positive(rotor_inertia, "rotor_inertia");
  require_positive(air_density, "air_density");
  if (!(cut_in_wind < rated_wind && rated_wind < cut_out_wind))
    throw std::invalid_argument("turbine wind speeds must satisfy cut_in < rated < cut_out");
  if (generator_efficiency > 1.0)
    throw std::invalid_argument("generator_efficiency must lie in (0, 1]");
}

}  // namespace windfd::turbsim
