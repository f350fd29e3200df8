#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "windfd/turbsim/simulator.hpp"

namespace windfd::dataset {

inline constexpr int kChannels = turbsim::kNumChannels;
inline constexpr int kDefaultWindow = 125;

/// floor((T - W) / stride) + 1 for T >= W, else 0. Throws std::invalid_argument
/// for non-positive W or stride.
std::size_t window_count(std::size_t rows, int window_length, int stride);

/// Contiguous W x 5 slices of `trace`, concatenated row-major (time, channel).
/// A trace shorter than W yields no windows and a warning.
std::vector<float> slide_windows(const turbsim::SensorTrace& trace, int window_length, int stride);

/// Raw (unnormalized) windows from a set of runs. Normalization is applied
/// per fold from that fold's training windows; see Normalizer.
struct WindowSet {
  int window_length = kDefaultWindow;
  int stride = kDefaultWindow;
  std::vector<float> windows;        // size() * window_length * kChannels
  std::vector<int> labels;           // per window, 0..7
  std::vector<int> groups;           // per window, index into run_ids
  std::vector<std::string> run_ids;  // one per source run
  std::vector<int> run_labels;       // one per source run

  std::size_t size() const { return labels.size(); }
  std::size_t window_values() const {
    return static_cast<std::size_t>(window_length) * kChannels;
  }
  const float* window(std::size_t i) const { return windows.data() + i * window_values(); }
  const std::string& group_id(std::size_t i) const { return run_ids[static_cast<std::size_t>(groups[i])]; }

  /// Appends all windows of one trace as a new run. Returns the number added.
  std::size_t add_run(const turbsim::SensorTrace& trace);

  /// Window counts per class (size 8).
  std::vector<std::size_t> class_histogram() const;

  /// Throws std::invalid_argument on inconsistent sizes or labels.
  void validate() const;
};

}  // namespace windfd::dataset
