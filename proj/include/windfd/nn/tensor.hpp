#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace windfd::nn {

/// Activations are column-major matrices with one row per channel and one
/// column per (sample, position) pair, column index = sample * positions +
/// position. Reinterpreting such a matrix as (channels * positions) x batch
/// gives a position-major, channel-fastest flatten.
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Channels and spatial extent of one sample; positions are row-major (h, w).
struct Shape {
  int c = 1;
  int h = 1;
  int w = 1;
  int positions() const { return h * w; }
  int size() const { return c * h * w; }
  bool flat() const { return h == 1 && w == 1; }
  bool operator==(const Shape&) const = default;
};

/// Train: dropout sampled, batch statistics. Infer: dropout off, running
/// statistics. MonteCarlo: dropout sampled, running statistics.
enum class Mode { Train, Infer, MonteCarlo };

enum class Activation { Linear, Relu };

template <class T>
struct ParamRef {
  std::string name;
  Mat<T>* value;
  Mat<T>* grad;
};

template <class T>
Eigen::Index batch_of(const Mat<T>& x, const Shape& s) {
  return x.cols() / s.positions();
}

}  // namespace windfd::nn
