#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "windfd/models/network.hpp"
#include "windfd/nn/adam.hpp"

namespace windfd::models {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  nn::AdamConfig adam{};
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;         // 1-based
  double train_loss = 0;  // mean over the epoch's batches, dropout active
  double val_loss = 0;    // deterministic pass; NaN without validation data
};

/// Samples are contiguous `net.sample_values()` floats each, already
/// normalized. Return false from the callback to stop after that epoch.
using EpochCallback = std::function<bool(const EpochRecord&)>;

struct Samples {
  std::span<const float> x;
  std::span<const int> labels;
  std::size_t size() const { return labels.size(); }
};

/// Mini-batch Adam on softmax cross-entropy. Every epoch visits each sample
/// exactly once in an order drawn from (seed, epoch). Throws TrainingDiverged
/// with 1-based epoch and batch on a non-finite loss.
std::vector<EpochRecord> train(Network& net, const Samples& train_set, const TrainConfig& cfg,
                               const Samples* validation = nullptr, const EpochCallback& on_epoch = {});

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Deterministic-pass loss and accuracy.
LossAccuracy evaluate(Network& net, const Samples& data, int batch_size = 256);

/// Epoch visiting order used by train().
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

}  // namespace windfd::models
