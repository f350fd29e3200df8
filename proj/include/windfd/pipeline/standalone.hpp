#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "windfd/eval/cross_validation.hpp"
#include "windfd/turbsim/simulator.hpp"

namespace windfd::pipeline {

// Single-step entry points behind the CLI's flag-driven subcommands. Each
// reads and writes plain artifacts without a run directory.

struct SimulateOptions {
  std::string scenario = "healthy";
  int runs = 1;
  double duration_s = 600.0;
  std::uint64_t seed = 0;
  double mean_wind = 18.2;
  double turbulence_intensity = 0.1;
  turbsim::SimulatorConfig simulator{};
  std::filesystem::path out;
};

/// Simulates `runs` runs of one scenario into `out` and merges them into
/// out/manifest.json (entries with the same run id are replaced). Run r
/// uses wind seed derive_seed(seed, "wind:<scenario>", r).
std::filesystem::path simulate_standalone(const SimulateOptions& options);

struct BuildDatasetOptions {
  std::filesystem::path manifest;
  int window = 125;
  int stride = 125;
  int folds = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

void build_dataset_standalone(const BuildDatasetOptions& options);

struct TrainOptions {
  std::string arch = "casu2net";
  std::filesystem::path dataset;
  int fold = 0;
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // a .ckpt file, or a directory for <arch>-fold<i>.ckpt
};

/// Trains on every fold but `fold` and returns the checkpoint path.
std::filesystem::path train_standalone(const TrainOptions& options);

struct PredictOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  int k = 200;  // 0 selects a single deterministic pass
  std::uint64_t seed = 0;
  std::filesystem::path out;  // .csv for the per-window table, anything else for JSON
};

/// Predicts the held-out windows of the checkpoint's fold.
eval::Predictions predict_standalone(const PredictOptions& options);

struct EvaluateOptions {
  std::string arch = "casu2net";
  std::filesystem::path dataset;
  bool uq = true;
  int k = 200;
  std::uint64_t seed = 0;
  int epochs = 15;
  int batch_size = 32;
  std::filesystem::path out;
};

/// Cross-validates one architecture on a stored dataset and renders its
/// report into `out`; checkpoints are cached in out/checkpoints.
eval::EvalReport evaluate_standalone(const EvaluateOptions& options);

struct VisualizeOptions {
  std::string layer = "fusion1";
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
};

/// t-SNE of the checkpoint's layer features on its fold's test windows.
/// Returns the written figure path.
std::filesystem::path visualize_standalone(const VisualizeOptions& options);

}  // namespace windfd::pipeline
