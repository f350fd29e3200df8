#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/dataset/normalizer.hpp"
#include "windfd/models/model_spec.hpp"
#include "windfd/models/network.hpp"

namespace windfd::models {

struct TrainingMetadata {
  int epochs = 0;
  int batch_size = 0;
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int fold = -1;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::string config_hash;

  nlohmann::json to_json() const;
  static TrainingMetadata from_json(const nlohmann::json& j);
  bool operator==(const TrainingMetadata&) const = default;
};

/// Trained weights with everything needed to rebuild and feed the network.
struct Checkpoint {
  ModelSpec spec;
  std::uint64_t init_seed = 0;
  TrainingMetadata metadata;
  dataset::NormalizationStats normalization;
  std::vector<std::string> names;           // parameters, then buffers
  std::vector<std::vector<float>> tensors;  // same order as names
};

Checkpoint capture(Network& net, std::uint64_t init_seed, TrainingMetadata metadata,
                   const dataset::NormalizationStats& normalization);

/// Rebuilds the network and copies the stored tensors into it.
Network restore(const Checkpoint& ckpt);

/// Binary container: magic, JSON header (spec, spec hash, metadata,
/// normalization, tensor names and sizes), float32 tensors, then a trailing
/// FNV-1a checksum of all preceding bytes.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ChecksumError for a corrupt or truncated file and
/// std::invalid_argument when `expected_spec_hash` is given and differs.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_spec_hash = std::nullopt);

}  // namespace windfd::models
