#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/dataset/window_store.hpp"
#include "windfd/eval/cross_validation.hpp"
#include "windfd/models/network.hpp"
#include "windfd/pipeline/run_config.hpp"

namespace windfd::pipeline {

enum class Stage { Simulate, BuildDataset, Train, Predict, Evaluate, Visualize };

inline constexpr Stage kAllStages[] = {Stage::Simulate, Stage::BuildDataset, Stage::Train,
                                       Stage::Predict,  Stage::Evaluate,     Stage::Visualize};

std::string_view stage_name(Stage stage);  // "simulate", "build-dataset", ...
Stage parse_stage(std::string_view text);

/// Layout of a run directory.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path traces() const { return root / "traces"; }
  std::filesystem::path trace_manifest() const { return traces() / "manifest.json"; }
  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path predictions() const { return root / "predictions"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path figures() const { return reports() / "figures"; }
  std::filesystem::path stages() const { return root / "stages"; }
  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path progress() const { return root / "progress.jsonl"; }
  std::filesystem::path ledger() const { return root / "ledger.jsonl"; }
  std::filesystem::path lock() const { return root / ".lock"; }
};

/// What a finished stage produced. `key` hashes the stage's config block
/// together with the artifact hash of its upstream stage; `artifacts` maps
/// run-relative paths to content hashes.
struct StageRecord {
  std::string stage;
  std::string key;
  std::string config_hash;
  std::map<std::string, std::string> artifacts;
  nlohmann::json details = nlohmann::json::object();

  /// Hash over the artifact table; feeds downstream keys.
  std::string artifact_hash() const;
  nlohmann::json to_json() const;
  static StageRecord from_json(const nlohmann::json& j);
};

struct StageOutcome {
  Stage stage;
  bool skipped = false;
  StageRecord record;
};

/// Exclusive ownership of a run directory for the lifetime of the object.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& path);
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;
  ~RunLock();

 private:
  std::filesystem::path path_;
};

/// A validated config bound to its run directory. Creating one writes
/// config.json, or throws std::runtime_error when the directory already
/// belongs to a different config hash.
class RunContext {
 public:
  explicit RunContext(RunConfig config);

  const RunConfig& config() const { return config_; }
  const RunPaths& paths() const { return paths_; }
  const std::string& config_hash() const { return hash_; }

  /// Appends one line to progress.jsonl.
  void progress(Stage stage, std::string_view event, const nlohmann::json& detail = {}) const;

 private:
  RunConfig config_;
  RunPaths paths_;
  std::string hash_;
};

/// Runs one stage, or skips it when its record matches the current key and
/// every recorded artifact is present with the recorded content hash.
/// Throws StageFailure naming the stage on any error.
StageOutcome run_stage(const RunContext& ctx, Stage stage, bool force = false);

/// The stored record of a stage, if any.
std::optional<StageRecord> read_stage_record(const RunPaths& paths, Stage stage);

/// Prediction file written by the predict stage.
struct PredictionFile {
  std::string config_hash;
  int k_folds = 0;
  std::vector<eval::FoldFailure> failures;
  eval::Predictions predictions;

  nlohmann::json to_json() const;
  static PredictionFile from_json(const nlohmann::json& j);
};
void write_prediction_file(const std::filesystem::path& path, const PredictionFile& file);
PredictionFile read_prediction_file(const std::filesystem::path& path);

/// Layer features of the given windows from a deterministic pass, one row
/// per window (row-major n x width).
std::vector<double> layer_features(models::Network& net, const std::vector<float>& inputs, std::size_t n,
                                   const std::string& layer, std::size_t& width);

struct Embedding {
  std::string layer;
  std::vector<double> points;  // n x 2
  std::vector<int> labels;
  double silhouette = 0.0;
};

/// t-SNE of a trained fold network's `layer` features on that fold's test
/// windows. Writes tsne-<stem>.svg and tsne-<stem>.json into `out_dir`.
Embedding embed_fold(const models::Checkpoint& ckpt, const dataset::StoredDataset& data, int fold,
                     const std::string& layer, double perplexity, int iterations, std::uint64_t seed,
                     const std::filesystem::path& out_dir, const std::string& stem);

}  // namespace windfd::pipeline
