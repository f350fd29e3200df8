#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/dataset/window_store.hpp"
#include "windfd/eval/metrics.hpp"
#include "windfd/eval/roc.hpp"
#include "windfd/eval/trees.hpp"
#include "windfd/models/checkpoint.hpp"
#include "windfd/models/model_spec.hpp"
#include "windfd/models/trainer.hpp"
#include "windfd/uq/mc_dropout.hpp"

namespace windfd::eval {

/// Test-window predictions of one model in one mode, over every evaluated
/// fold. Row k describes window `window[k]` of the dataset.
struct Predictions {
  std::string model;
  bool uq = false;
  int n_classes = 8;
  std::vector<std::size_t> window;
  std::vector<int> fold;
  std::vector<int> label;
  std::vector<int> predicted;
  std::vector<double> probs;  // rows x n_classes
  std::vector<double> entropy;

  std::size_t size() const { return label.size(); }
  void append(std::size_t window_index, int fold_index, int truth, std::span<const double> p);

  nlohmann::json to_json() const;
  static Predictions from_json(const nlohmann::json& j);
  bool operator==(const Predictions&) const = default;
};

struct FoldFailure {
  int fold = 0;
  std::string error;
};

struct FoldResult {
  int fold = 0;
  bool ok = true;
  std::string error;
  std::size_t n_test = 0;
  ConfusionMatrix confusion;
  Metrics metrics;
  std::optional<double> macro_auc;
  std::size_t n_runs = 0;
  double run_accuracy = 0.0;
};

/// Cross-validated scores of one model in one mode. `mean` holds the
/// unweighted mean of the per-fold ratios over successful folds with pooled
/// counts; `pooled` scores every test window at once. Carries no wall time,
/// so equal inputs give equal reports.
struct EvalReport {
  std::string model;
  bool uq = false;
  int mc_passes = 0;
  int n_classes = 8;
  int k_folds = 0;
  std::string config_hash;
  std::vector<FoldResult> folds;
  Metrics mean;
  Metrics pooled;
  ConfusionMatrix confusion;
  RocResult roc;
  std::size_t n_runs = 0;
  double run_accuracy = 0.0;  // majority vote of each test run's windows
  uq::UncertaintySummary uncertainty;
  nlohmann::json runtime = nlohmann::json::object();

  bool complete() const;
  std::string label() const;  // e.g. "casu2net (UQ)"
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  bool operator==(const EvalReport& other) const { return to_json() == other.to_json(); }
};

/// Scores `pred` per fold and pooled. Folds listed in `failures` are
/// recorded with their error and left out of every aggregate. Asserts the
/// micro identity on every fold and on the pooled counts.
EvalReport score_predictions(const Predictions& pred, const dataset::WindowSet& set, int k_folds,
                             const std::vector<FoldFailure>& failures = {}, const std::string& config_hash = {});

/// Majority vote per run over its windows' predicted classes; the lowest
/// class wins ties. Returns (runs, correctly voted runs).
std::pair<std::size_t, std::size_t> run_votes(const Predictions& pred, const dataset::WindowSet& set,
                                              std::optional<int> fold = std::nullopt);

struct CvOptions {
  models::TrainConfig train;  // seed is replaced per fold
  std::uint64_t seed = 0;
  bool plain = true;          // single deterministic pass
  bool uq = true;             // MonteCarlo dropout with mc_passes
  int mc_passes = 200;
  int mc_batch = 256;
  std::vector<int> folds;     // empty means every fold
  std::optional<std::filesystem::path> checkpoint_dir;
  std::string config_hash;
  std::function<void(const std::string&)> progress;
};

struct CvOutput {
  Predictions plain;
  Predictions uq;
  std::vector<FoldFailure> failures;
  std::vector<models::TrainingMetadata> training;  // one per trained or reused fold
};

/// Seeds of fold `f`: network init, training order and dropout, MC sampling.
std::uint64_t fold_init_seed(std::uint64_t seed, int fold);
std::uint64_t fold_train_seed(std::uint64_t seed, int fold);
std::uint64_t fold_mc_seed(std::uint64_t seed, int fold);

/// Checkpoint file for one model and fold.
std::filesystem::path fold_checkpoint_path(const std::filesystem::path& dir, const models::ModelSpec& spec, int fold);

/// Trains one network per fold on the other folds' runs (normalized with
/// that fold's statistics) and predicts the held-out windows. With a
/// checkpoint directory, a stored fold whose spec and config hash match is
/// reused instead of retrained, and new ones are written there. A fold that
/// throws is recorded in `failures` and the remaining folds still run.
CvOutput run_cv(const models::ModelSpec& spec, const dataset::StoredDataset& data, const CvOptions& options);

struct BaselineOptions {
  TreeOptions tree{};
  ForestOptions forest{};
  std::uint64_t seed = 0;
  std::vector<int> folds;  // empty means every fold
};

struct BaselineOutput {
  Predictions tree;
  Predictions forest;
};

/// Decision tree and random forest on raw windows flattened to
/// window_length x channels features, under the same fold plan.
BaselineOutput baseline_classifiers(const dataset::WindowSet& set, const dataset::FoldPlan& plan,
                                    const BaselineOptions& options);

}  // namespace windfd::eval
