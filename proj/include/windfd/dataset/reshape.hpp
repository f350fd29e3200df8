#pragma once

#include <array>
#include <span>
#include <vector>

namespace windfd::dataset {

/// Dense 4-D tensor (sequence, rows, cols, channels), last axis fastest.
struct Tensor4 {
  std::array<int, 4> dims{};
  std::vector<float> data;

  float at(int s, int r, int c, int ch) const {
    return data[((static_cast<std::size_t>(s) * dims[1] + r) * dims[2] + c) * dims[3] + ch];
  }
};

/// 125 x 5 window -> 5 x 1 x 25 x 5: sequence element s holds rows
/// [25 s, 25 s + 25) in time order, spatial map 1 x 25, channels = sensors.
/// Throws std::invalid_argument unless rows * 5 == window.size() and `steps`
/// divides `rows`.
Tensor4 reshape_for_convlstm(std::span<const float> window, int rows = 125, int steps = 5);

/// Inverse of reshape_for_convlstm; returns the row-major rows x 5 window.
std::vector<float> reshape_from_convlstm(const Tensor4& tensor);

}  // namespace windfd::dataset
