#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/turbsim/simulator.hpp"

namespace windfd::turbsim {

nlohmann::json scenario_to_json(const FaultScenario& scenario);
FaultScenario scenario_from_json(const nlohmann::json& j);

/// Text trace file: two '#' header lines (format tag, JSON header with run id,
/// label, sample rate, channel names and units, wind seed and scenario), a CSV
/// column line, then T rows of 5 values printed in shortest round-trip form.
void write_trace(const std::filesystem::path& path, const SensorTrace& trace,
                 const std::string& config_hash = {});
SensorTrace read_trace(const std::filesystem::path& path);

struct CorpusEntry {
  std::string run_id;
  std::string file;  // relative to the manifest directory
  int label = 0;
  std::uint64_t wind_seed = 0;
  double duration = 0.0;
};

struct CorpusManifest {
  std::string config_hash;
  double sample_rate = 80.0;
  std::vector<CorpusEntry> runs;
};

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);
CorpusManifest read_manifest(const std::filesystem::path& path);

}  // namespace windfd::turbsim
