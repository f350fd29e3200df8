#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "windfd/nn/tensor.hpp"

namespace windfd::nn {

/// Column-wise softmax of logits (classes x batch).
template <class T>
Mat<T> softmax(const Mat<T>& logits) {
  Mat<T> p = logits.rowwise() - logits.colwise().maxCoeff();
  p = p.array().exp().matrix();
  const auto sums = p.colwise().sum().eval();
  for (Eigen::Index j = 0; j < p.cols(); ++j) p.col(j) /= sums(j);
  return p;
}

/// Mean categorical cross-entropy of softmax(logits) against integer labels;
/// `grad` receives d(loss)/d(logits). Accumulates in double.
template <class T>
double softmax_cross_entropy(const Mat<T>& logits, std::span<const int> labels, Mat<T>& grad) {
  if (static_cast<std::size_t>(logits.cols()) != labels.size())
    throw std::invalid_argument("label count does not match the batch");
  grad = softmax(logits);
  const auto B = static_cast<double>(logits.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    if (y < 0 || y >= logits.rows()) throw std::invalid_argument("label out of range");
    const Eigen::Index r = y;
    const T mx = logits.col(j).maxCoeff();
    const double lse = static_cast<double>(mx) +
                       std::log(static_cast<double>((logits.col(j).array() - mx).exp().sum()));
    loss += lse - static_cast<double>(logits(r, j));
    grad(r, j) -= T(1);
  }
  grad /= static_cast<T>(B);
  return loss / B;
}

}  // namespace windfd::nn
