#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "windfd/nn/im2col.hpp"
#include "windfd/nn/layers.hpp"
#include "windfd/nn/tensor.hpp"

namespace windfd::nn {

/// Convolutional LSTM layer with same padding and elementwise peepholes.
///
///   z_t = tanh(Wz * x_t + Rz * y_{t-1} + bz)
///   i_t = sigm(Wi * x_t + Ri * y_{t-1} + pi . c_{t-1} + bi)
///   f_t = sigm(Wf * x_t + Rf * y_{t-1} + pf . c_{t-1} + bf)
///   c_t = z_t . i_t + c_{t-1} . f_t
///   o_t = sigm(Wo * x_t + Ro * y_{t-1} + po . c_t + bo)
///   y_t = tanh(c_t) . o_t
///
/// `*` is a convolution, `.` the elementwise product; peepholes hold one
/// weight per (filter, position). Gate rows are stacked z, i, f, o. The
/// input-block and output activations (tanh above) can be swapped for ReLU.
enum class CellActivation { Tanh, Relu };

template <class T>
class ConvLstm {
 public:
  struct State {
    Mat<T> c;  // F x P*B
    Mat<T> y;  // F x P*B
  };

  ConvLstm(Shape in, int filters, int kh, int kw, bool return_sequences, bool peepholes, Rng& rng,
           CellActivation activation = CellActivation::Tanh)
      : in_(in),
        filters_(filters),
        gx_(ConvGeometry::make(in, kh, kw, true)),
        gh_(ConvGeometry::make({filters, in.h, in.w}, kh, kw, true)),
        return_sequences_(return_sequences),
        peepholes_(peepholes),
        activation_(activation) {
    if (filters <= 0) throw std::invalid_argument("convlstm filters must be positive");
    const int F = filters;
    wx_.resize(4 * F, gx_.rows());
    wh_.resize(4 * F, gh_.rows());
    fill_uniform(wx_, std::sqrt(3.0 / gx_.rows()), rng);
    fill_uniform(wh_, std::sqrt(3.0 / gh_.rows()), rng);
    b_ = Mat<T>::Zero(4 * F, 1);
    b_.block(2 * F, 0, F, 1).setOnes();
    const int P = in.positions();
    pi_ = Mat<T>::Zero(F, P);
    pf_ = Mat<T>::Zero(F, P);
    po_ = Mat<T>::Zero(F, P);
  }

  Shape input_shape() const { return in_; }
  Shape output_shape() const { return {filters_, in_.h, in_.w}; }
  int filters() const { return filters_; }
  bool return_sequences() const { return return_sequences_; }
  bool peepholes() const { return peepholes_; }
  CellActivation activation() const { return activation_; }

  /// `xs[t]` is Cin x P*B. Returns every y_t, or only the last one when
  /// return_sequences is false. A null `initial` means zero state.
  std::vector<Mat<T>> forward(const std::vector<Mat<T>>& xs, const State* initial = nullptr) {
    if (xs.empty()) throw std::invalid_argument("convlstm input sequence is empty");
    const int F = filters_;
    const int P = in_.positions();
    const Eigen::Index cols = xs[0].cols();
    if (cols % P != 0) throw std::invalid_argument("convlstm input columns are not a multiple of positions");
    const Eigen::Index B = cols / P;
    const std::size_t steps = xs.size();
    for (const auto& x : xs)
      if (x.rows() != in_.c || x.cols() != cols)
        throw std::invalid_argument("convlstm input step has shape " + std::to_string(x.rows()) + "x" +
                                    std::to_string(x.cols()) + ", expected " + std::to_string(in_.c) +
                                    "x" + std::to_string(cols));
    if (initial && (initial->c.rows() != F || initial->c.cols() != cols || initial->y.rows() != F ||
                    initial->y.cols() != cols))
      throw std::invalid_argument("convlstm initial state shape mismatch");

    batch_ = B;
    cache_.assign(steps, {});
    Mat<T> c_prev = initial ? initial->c : Mat<T>::Zero(F, cols);
    Mat<T> y_prev = initial ? initial->y : Mat<T>::Zero(F, cols);
    bool has_prev_y = initial != nullptr;
    c0_ = c_prev;

    std::vector<Mat<T>> out;
    for (std::size_t t = 0; t < steps; ++t) {
      Step& s = cache_[t];
      im2col(gx_, xs[t], s.cols_x);
      Mat<T> pre = wx_ * s.cols_x;
      s.has_h = has_prev_y;
      if (has_prev_y) {
        im2col(gh_, y_prev, s.cols_h);
        pre.noalias() += wh_ * s.cols_h;
      }
      pre.colwise() += b_.col(0);

      s.z = act(pre.topRows(F));
      Mat<T> ai = pre.middleRows(F, F);
      Mat<T> af = pre.middleRows(2 * F, F);
      if (peepholes_) {
        ai += peep(pi_, c_prev, B);
        af += peep(pf_, c_prev, B);
      }
      s.i = ai.array().logistic().matrix();
      s.f = af.array().logistic().matrix();
      s.c_prev = c_prev;
      s.c = s.z.cwiseProduct(s.i) + c_prev.cwiseProduct(s.f);
      Mat<T> ao = pre.bottomRows(F);
      if (peepholes_) ao += peep(po_, s.c, B);
      s.o = ao.array().logistic().matrix();
      s.tc = act(s.c);
      y_prev = s.o.cwiseProduct(s.tc);
      c_prev = s.c;
      has_prev_y = true;
      if (return_sequences_) out.push_back(y_prev);
    }
    if (!return_sequences_) out.push_back(y_prev);
    final_ = {c_prev, y_prev};
    return out;
  }

  const State& final_state() const { return final_; }

  /// `dys` matches the forward output (every step, or only the last).
  /// Stores parameter gradients and returns d(loss)/d(x_t) for every step.
  std::vector<Mat<T>> backward(const std::vector<Mat<T>>& dys) {
    const std::size_t steps = cache_.size();
    if (steps == 0) throw std::logic_error("convlstm backward called before forward");
    if (dys.size() != (return_sequences_ ? steps : 1))
      throw std::invalid_argument("convlstm backward got the wrong number of output gradients");
    const int F = filters_;
    const int P = in_.positions();
    const Eigen::Index B = batch_;
    const Eigen::Index cols = B * P;

    gwx_ = Mat<T>::Zero(wx_.rows(), wx_.cols());
    gwh_ = Mat<T>::Zero(wh_.rows(), wh_.cols());
    gb_ = Mat<T>::Zero(b_.rows(), 1);
    gpi_ = Mat<T>::Zero(F, P);
    gpf_ = Mat<T>::Zero(F, P);
    gpo_ = Mat<T>::Zero(F, P);

    std::vector<Mat<T>> dxs(steps);
    Mat<T> dh_next = Mat<T>::Zero(F, cols);
    Mat<T> dc_next = Mat<T>::Zero(F, cols);
    Mat<T> dg(4 * F, cols);
    for (std::size_t tt = steps; tt-- > 0;) {
      const Step& s = cache_[tt];
      Mat<T> dh = dh_next;
      if (return_sequences_) dh += dys[tt];
      else if (tt == steps - 1) dh += dys[0];

      auto sig_d = [](const Mat<T>& g) { return (g.array() * (T(1) - g.array())).matrix(); };
      Mat<T> dao = dh.cwiseProduct(s.tc).cwiseProduct(sig_d(s.o));
      Mat<T> dc = dc_next + dh.cwiseProduct(s.o).cwiseProduct(act_d(s.tc));
      if (peepholes_) {
        dc += peep(po_, dao, B);
        gpo_ += block_sum(dao.cwiseProduct(s.c), P, B);
      }
      Mat<T> daz = dc.cwiseProduct(s.i).cwiseProduct(act_d(s.z));
      Mat<T> dai = dc.cwiseProduct(s.z).cwiseProduct(sig_d(s.i));
      Mat<T> daf = dc.cwiseProduct(s.c_prev).cwiseProduct(sig_d(s.f));
      dc_next = dc.cwiseProduct(s.f);
      if (peepholes_) {
        dc_next += peep(pi_, dai, B) + peep(pf_, daf, B);
        gpi_ += block_sum(dai.cwiseProduct(s.c_prev), P, B);
        gpf_ += block_sum(daf.cwiseProduct(s.c_prev), P, B);
      }
      dg.topRows(F) = daz;
      dg.middleRows(F, F) = dai;
      dg.middleRows(2 * F, F) = daf;
      dg.bottomRows(F) = dao;

      gwx_.noalias() += dg * s.cols_x.transpose();
      gb_ += dg.rowwise().sum();
      Mat<T> dcols = wx_.transpose() * dg;
      col2im(gx_, dcols, dxs[tt]);
      if (s.has_h) {
        gwh_.noalias() += dg * s.cols_h.transpose();
        Mat<T> dhcols = wh_.transpose() * dg;
        col2im(gh_, dhcols, dh_next);
      } else {
        dh_next.setZero(F, cols);
      }
    }
    return dxs;
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> p = {{"input_kernel", &wx_, &gwx_},
                                  {"recurrent_kernel", &wh_, &gwh_},
                                  {"bias", &b_, &gb_}};
    if (peepholes_) {
      p.push_back({"peephole_i", &pi_, &gpi_});
      p.push_back({"peephole_f", &pf_, &gpf_});
      p.push_back({"peephole_o", &po_, &gpo_});
    }
    return p;
  }

 private:
  struct Step {
    Mat<T> cols_x, cols_h, z, i, f, o, c, c_prev, tc;
    bool has_h = false;
  };

  Mat<T> act(const Mat<T>& a) const {
    if (activation_ == CellActivation::Relu) return a.cwiseMax(T(0));
    return a.array().tanh().matrix();
  }
  // Derivative expressed through the activation's output.
  Mat<T> act_d(const Mat<T>& v) const {
    if (activation_ == CellActivation::Relu) return (v.array() > T(0)).template cast<T>().matrix();
    return (T(1) - v.array().square()).matrix();
  }

  // p (F x P) broadcast over the batch, times m (F x P*B).
  static Mat<T> peep(const Mat<T>& p, const Mat<T>& m, Eigen::Index B) {
    return p.replicate(1, B).cwiseProduct(m);
  }
  static Mat<T> block_sum(const Mat<T>& m, int P, Eigen::Index B) {
    Mat<T> s = Mat<T>::Zero(m.rows(), P);
    for (Eigen::Index b = 0; b < B; ++b) s += m.middleCols(b * P, P);
    return s;
  }

  Shape in_;
  int filters_;
  ConvGeometry gx_, gh_;
  bool return_sequences_;
  bool peepholes_;
  CellActivation activation_;
  Mat<T> wx_, wh_, b_, pi_, pf_, po_;
  Mat<T> gwx_, gwh_, gb_, gpi_, gpf_, gpo_;
  std::vector<Step> cache_;
  Eigen::Index batch_ = 0;
  Mat<T> c0_;
  State final_;
};

}  // namespace windfd::nn
