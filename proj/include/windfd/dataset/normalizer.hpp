#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "windfd/dataset/windows.hpp"

namespace windfd::dataset {

/// Per-channel z-score statistics. A channel whose standard deviation is
/// below `kMinStd` keeps std = 1, so it is centred but not scaled.
struct NormalizationStats {
  static constexpr double kMinStd = 1e-12;
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> std{1.0, 1.0, 1.0, 1.0, 1.0};

  nlohmann::json to_json() const;
  static NormalizationStats from_json(const nlohmann::json& j);
  bool operator==(const NormalizationStats&) const = default;
};

/// Fits on the rows of the listed windows. Throws std::invalid_argument when
/// `indices` is empty.
NormalizationStats fit_normalizer(const WindowSet& set, std::span<const std::size_t> indices);

/// Fits on a raw row-major (rows x 5) buffer.
NormalizationStats fit_normalizer(std::span<const float> values);

void apply_normalizer(const NormalizationStats& stats, std::span<float> values);

/// Normalized copy of the listed windows, packed contiguously.
std::vector<float> gather_normalized(const WindowSet& set, std::span<const std::size_t> indices,
                                     const NormalizationStats& stats);

}  // namespace windfd::dataset
