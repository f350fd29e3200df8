#include "windfd/dataset/reshape.hpp"

#include <stdexcept>
#include <string>

#include "windfd/dataset/windows.hpp"

namespace windfd::dataset {

// Both layouts are time-major with channels fastest, so the mapping is the
// identity on the flat buffer: (s, 0, j, c) <-> row 25 s + j, channel c.
Tensor4 reshape_for_convlstm(std::span<const float> window, int rows, int steps) {
  if (rows <= 0 || steps <= 0 || rows % steps != 0)
    throw std::invalid_argument("steps must divide the window length");
  if (window.size() != static_cast<std::size_t>(rows) * kChannels)
    throw std::invalid_argument("window must be " + std::to_string(rows) + " x 5, got " +
                                std::to_string(window.size()) + " values");
  Tensor4 t;
  t.dims = {steps, 1, rows / steps, kChannels};
  t.data.assign(window.begin(), window.end());
  return t;
}

std::vector<float> reshape_from_convlstm(const Tensor4& tensor) {
  if (tensor.dims[1] != 1 || tensor.dims[3] != kChannels)
    throw std::invalid_argument("tensor must be steps x 1 x cols x 5");
  const std::size_t expect = static_cast<std::size_t>(tensor.dims[0]) * tensor.dims[2] * kChannels;
  if (tensor.data.size() != expect) throw std::invalid_argument("tensor data does not match its dims");
  return tensor.data;
}

}  // namespace windfd::dataset
