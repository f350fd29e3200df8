#pragma once

#include <filesystem>
#include <vector>

#include "windfd/pipeline/run_config.hpp"
#include "windfd/pipeline/stages.hpp"

namespace windfd::pipeline {

struct RunSummary {
  std::filesystem::path run_dir;
  std::string config_hash;
  std::vector<StageOutcome> stages;
};

/// Every stage in order under the run-directory lock, skipping stages that
/// are up to date, then writes manifest.json (config hash, config and stage
/// records; no timestamps, so an unchanged rerun reproduces it byte for
/// byte). A visualize stage disabled in the config is left out. Throws
/// std::invalid_argument for an invalid config before any stage runs and
/// StageFailure naming the failing stage; earlier outputs stay on disk.
RunSummary full_run(const RunConfig& config, bool force = false);

/// Runs a single stage under the run-directory lock.
StageOutcome run_single_stage(const RunConfig& config, Stage stage, bool force = false);

}  // namespace windfd::pipeline
