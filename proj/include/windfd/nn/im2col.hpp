#pragma once

#include <algorithm>
#include <stdexcept>

#include "windfd/nn/tensor.hpp"

namespace windfd::nn {

/// Stride-1 2-D convolution geometry. "same" pads floor((k-1)/2) before and
/// the rest after; "valid" pads nothing.
struct ConvGeometry {
  Shape in;
  int kh = 1, kw = 1;
  int ph = 0, pw = 0;
  int oh = 1, ow = 1;

  static ConvGeometry make(const Shape& in, int kh, int kw, bool same) {
    if (kh <= 0 || kw <= 0) throw std::invalid_argument("kernel extents must be positive");
    ConvGeometry g;
    g.in = in;
    g.kh = kh;
    g.kw = kw;
    if (same) {
      g.ph = (kh - 1) / 2;
      g.pw = (kw - 1) / 2;
      g.oh = in.h;
      g.ow = in.w;
    } else {
      g.oh = in.h - kh + 1;
      g.ow = in.w - kw + 1;
      if (g.oh <= 0 || g.ow <= 0) throw std::invalid_argument("kernel larger than input for valid padding");
    }
    return g;
  }
  int rows() const { return kh * kw * in.c; }
  int out_positions() const { return oh * ow; }
};

/// cols(row (i*kw + j)*C + c, col b*oh*ow + y*ow + x) = x(c, b*H*W + (y+i-ph)*W + (x+j-pw)),
/// zero outside the input.
template <class T>
void im2col(const ConvGeometry& g, const Mat<T>& x, Mat<T>& cols) {
  const int C = g.in.c, H = g.in.h, W = g.in.w;
  const Eigen::Index batch = x.cols() / (H * W);
  cols.setZero(g.rows(), batch * g.out_positions());
  for (Eigen::Index b = 0; b < batch; ++b)
    for (int y = 0; y < g.oh; ++y)
      for (int xo = 0; xo < g.ow; ++xo) {
        T* dst = cols.data() + (b * g.out_positions() + y * g.ow + xo) * g.rows();
        for (int i = 0; i < g.kh; ++i) {
          const int iy = y + i - g.ph;
          if (iy < 0 || iy >= H) continue;
          for (int j = 0; j < g.kw; ++j) {
            const int ix = xo + j - g.pw;
            if (ix < 0 || ix >= W) continue;
            const T* src = x.data() + (b * H * W + iy * W + ix) * C;
            std::copy_n(src, C, dst + (i * g.kw + j) * C);
          }
        }
      }
}

/// Adjoint of im2col: scatters-and-adds columns back onto the input layout.
template <class T>
void col2im(const ConvGeometry& g, const Mat<T>& cols, Mat<T>& dx) {
  const int C = g.in.c, H = g.in.h, W = g.in.w;
  const Eigen::Index batch = cols.cols() / g.out_positions();
  dx.setZero(C, batch * H * W);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (int y = 0; y < g.oh; ++y)
      for (int xo = 0; xo < g.ow; ++xo) {
        const T* src = cols.data() + (b * g.out_positions() + y * g.ow + xo) * g.rows();
        for (int i = 0; i < g.kh; ++i) {
          const int iy = y + i - g.ph;
          if (iy < 0 || iy >= H) continue;
          for (int j = 0; j < g.kw; ++j) {
            const int ix = xo + j - g.pw;
            if (ix < 0 || ix >= W) continue;
            T* dst = dx.data() + (b * H * W + iy * W + ix) * C;
            const T* s = src + (i * g.kw + j) * C;
            for (int c = 0; c < C; ++c) dst[c] += s[c];
          }
        }
      }
}

}  // namespace windfd::nn
