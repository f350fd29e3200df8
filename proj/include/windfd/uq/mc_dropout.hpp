#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "windfd/models/network.hpp"

namespace windfd::uq {

/// Averaged class probabilities of K stochastic passes for one input.
struct PredictionDistribution {
  std::vector<double> mean_probs;
  std::vector<double> class_std;                 // population std over passes
  std::vector<std::vector<double>> pass_probs;   // K x C when retained
  int predicted_class = 0;                       // argmax, lowest index on ties
  double entropy = 0.0;                          // nats, of mean_probs
};

struct McOptions {
  int k = 200;
  std::uint64_t seed = 0;
  int batch_size = 256;
  bool retain_passes = false;
};

/// Predictive entropy -sum p ln p with 0 ln 0 = 0.
double entropy(std::span<const double> probs);

/// Index of the largest value; the lowest index wins ties.
int argmax(std::span<const double> values);

/// Running mean and variance (Welford) of the given pass rows, in double.
/// Identical passes give their common value and zero std exactly.
PredictionDistribution summarize_passes(const std::vector<std::vector<double>>& passes, bool retain = false);

/// K MonteCarlo passes per input with dropout sampled and batch
/// normalization on running statistics. Pass k of input batch b draws from
/// the stream derive_seed(derive_seed(seed, "mc-batch", b), k). Throws
/// std::invalid_argument for K < 1.
std::vector<PredictionDistribution> mc_predict(models::Network& net, std::span<const float> inputs,
                                               const McOptions& options);

/// One deterministic pass per input, reported in the same form (std = 0).
std::vector<PredictionDistribution> deterministic_predict(models::Network& net, std::span<const float> inputs,
                                                          int batch_size = 256);

struct UncertaintySummary {
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  double mean_entropy = 0.0;
  double mean_entropy_correct = 0.0;    // NaN when there are none
  double mean_entropy_incorrect = 0.0;  // NaN when there are none
  std::vector<double> bin_edges;        // bins + 1 edges over [0, ln C]
  std::vector<std::size_t> hist_correct;
  std::vector<std::size_t> hist_incorrect;

  nlohmann::json to_json() const;
  static UncertaintySummary from_json(const nlohmann::json& j);
};

/// Throws std::invalid_argument when the sizes differ.
UncertaintySummary uncertainty_report(const std::vector<PredictionDistribution>& dists,
                                      std::span<const int> labels, int bins = 20);

}  // namespace windfd::uq
