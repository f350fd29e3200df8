#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/turbsim/simulator.hpp"

namespace windfd::pipeline {

enum class Profile { Paper, Desk };

Profile parse_profile(std::string_view text);  // "paper-scale" | "desk-scale"
std::string_view profile_name(Profile profile);

struct SimulationBlock {
  int healthy_runs = 14;
  int fault_runs = 4;  // per fault class
  double duration_s = 60.0;
  double mean_wind = 18.2;             // m/s
  double turbulence_intensity = 0.1;
  turbsim::SimulatorConfig simulator{};
};

struct DatasetBlock {
  int window = 125;
  int stride = 125;
  int folds = 10;
};

struct ModelBlock {
  std::vector<std::string> architectures = {"casu2net", "simple-cnn", "multi-headed"};
  int epochs = 15;
  int batch_size = 32;
  double learning_rate = 1e-3;
  bool baselines = true;
  int tree_max_depth = 50;
  int forest_estimators = 200;
};

struct UqBlock {
  bool enabled = true;
  int k = 200;
};

struct VisualizeBlock {
  bool enabled = true;
  std::string architecture = "casu2net";
  std::vector<std::string> layers = {"fusion1", "fusion2"};
  int fold = 0;
  double perplexity = 30.0;
  int iterations = 1000;
};

/// Everything a full run depends on. Stage seeds are derived from `seed`.
/// The hash covers every field except `output_root`.
struct RunConfig {
  Profile profile = Profile::Desk;
  std::uint64_t seed = 42;
  SimulationBlock simulation{};
  DatasetBlock dataset{};
  ModelBlock model{};
  UqBlock uq{};
  VisualizeBlock visualize{};
  std::filesystem::path output_root = "runs/desk";

  /// Paper scale: 140 healthy and 40 per fault runs of 600 s, 50 epochs.
  /// Desk scale: 14 and 4 runs of 60 s, 15 epochs.
  static RunConfig defaults(Profile profile);

  /// Starts from the defaults of `profile` (or "desk-scale") and applies
  /// every field present in `j`. Unknown keys throw std::invalid_argument.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
  std::string hash() const;

  std::uint64_t stage_seed(std::string_view stage) const;
};

/// Reads a JSON config file, then applies WINDFD_SEED and
/// WINDFD_OUTPUT_ROOT from the environment when set, then validates.
RunConfig load_run_config(const std::filesystem::path& path);
void apply_env_overrides(RunConfig& config);

}  // namespace windfd::pipeline
