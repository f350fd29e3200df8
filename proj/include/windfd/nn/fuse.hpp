#pragma once

#include <stdexcept>
#include <vector>

#include "windfd/nn/tensor.hpp"

namespace windfd::nn {

/// Concatenates flat (features x batch) inputs along the feature axis in the
/// given order. `offsets`, when given, receives each input's first row.
template <class T>
Mat<T> fuse(const std::vector<const Mat<T>*>& parts, std::vector<Eigen::Index>* offsets = nullptr) {
  if (parts.empty()) throw std::invalid_argument("fuse needs at least one input");
  const Eigen::Index batch = parts[0]->cols();
  Eigen::Index rows = 0;
  for (const auto* p : parts) {
    if (p->cols() != batch)
      throw std::invalid_argument("fuse inputs disagree on batch size: " + std::to_string(p->cols()) +
                                  " vs " + std::to_string(batch));
    rows += p->rows();
  }
  Mat<T> out(rows, batch);
  if (offsets) offsets->clear();
  Eigen::Index r = 0;
  for (const auto* p : parts) {
    if (offsets) offsets->push_back(r);
    out.middleRows(r, p->rows()) = *p;
    r += p->rows();
  }
  return out;
}

template <class T>
Mat<T> fuse(const std::vector<Mat<T>>& parts, std::vector<Eigen::Index>* offsets = nullptr) {
  std::vector<const Mat<T>*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return fuse(ptrs, offsets);
}

/// Inverse of fuse for known widths.
template <class T>
std::vector<Mat<T>> split_rows(const Mat<T>& fused, const std::vector<Eigen::Index>& widths) {
  std::vector<Mat<T>> out;
  Eigen::Index r = 0;
  for (auto w : widths) {
    out.push_back(fused.middleRows(r, w));
    r += w;
  }
  if (r != fused.rows()) throw std::invalid_argument("split widths do not cover the fused rows");
  return out;
}

}  // namespace windfd::nn
