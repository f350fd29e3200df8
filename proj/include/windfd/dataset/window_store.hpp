#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "windfd/dataset/folds.hpp"
#include "windfd/dataset/normalizer.hpp"
#include "windfd/dataset/windows.hpp"

namespace windfd::dataset {

/// A persisted dataset: raw windows, the fold plan and one set of
/// normalization statistics per fold, each fitted on that fold's training
/// windows only.
struct StoredDataset {
  WindowSet set;
  FoldPlan plan;
  std::vector<NormalizationStats> fold_stats;
  std::string config_hash;
};

/// Fits the per-fold statistics for `plan`.
std::vector<NormalizationStats> fit_fold_stats(const WindowSet& set, const FoldPlan& plan);

/// Writes `windows.bin` (float32 tensor) and `dataset.json` (shapes, label
/// map, run table, fold plan, statistics, config hash, tensor checksum).
void save_dataset(const std::filesystem::path& dir, const StoredDataset& data);

/// Throws ChecksumError when the tensor file does not match its sidecar.
StoredDataset load_dataset(const std::filesystem::path& dir);

}  // namespace windfd::dataset
