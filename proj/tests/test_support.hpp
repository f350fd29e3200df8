#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "windfd/turbsim/fault.hpp"
#include "windfd/turbsim/simulator.hpp"
#include "windfd/turbsim/wind.hpp"

namespace windfd::test {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("windfd-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline turbsim::SensorTrace simulate(turbsim::FaultKind kind, std::uint64_t wind_seed, double duration,
                                     const turbsim::SimulatorConfig& cfg = {}) {
  const auto wind = turbsim::generate_wind(wind_seed, duration, 1.0 / cfg.sample_rate, 18.2, 0.1);
  return turbsim::run_simulation(cfg, turbsim::FaultScenario::make(kind), wind, duration,
                                 std::string(turbsim::fault_name(kind)));
}

/// Trace of `rows` samples whose row r holds value r + 0.1 * channel.
inline turbsim::SensorTrace ramp_trace(std::size_t rows, int label = 0, const std::string& id = "ramp") {
  turbsim::SensorTrace t;
  t.run_id = id;
  t.scenario = turbsim::FaultScenario::make(turbsim::fault_from_label(label));
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < turbsim::kNumChannels; ++c) t.values.push_back(static_cast<double>(r) + 0.1 * c);
  return t;
}

/// Trace of Gaussian noise around a class-specific mean per channel.
inline turbsim::SensorTrace noise_trace(std::size_t rows, int label, const std::string& id, std::uint64_t seed,
                                        double separation = 1.0) {
  turbsim::SensorTrace t;
  t.run_id = id;
  t.scenario = turbsim::FaultScenario::make(turbsim::fault_from_label(label));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < turbsim::kNumChannels; ++c)
      t.values.push_back(n(rng) + separation * ((label + c) % 8 == 0 ? 3.0 : 0.0) + separation * label * (c == 1));
  return t;
}

}  // namespace windfd::test
