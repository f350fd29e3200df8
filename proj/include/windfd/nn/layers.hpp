#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "windfd/common/random.hpp"
#include "windfd/nn/im2col.hpp"
#include "windfd/nn/tensor.hpp"

namespace windfd::nn {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class T>
void fill_uniform(Mat<T>& m, double limit, Rng& rng) {
  for (Eigen::Index k = 0; k < m.size(); ++k)
    m.data()[k] = static_cast<T>((2.0 * unit_uniform(rng) - 1.0) * limit);
}

template <class T>
Mat<T> relu_mask(const Mat<T>& y) {
  return (y.array() > T(0)).template cast<T>().matrix();
}

template <class T>
class Layer {
 public:
  explicit Layer(Shape in) : in_(in) {}
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Shape output_shape() const = 0;
  virtual Mat<T> forward(const Mat<T>& x, Mode mode, Rng& rng) = 0;
  /// Stores parameter gradients (overwriting) and returns d(loss)/d(input)
  /// for the most recent forward call.
  virtual Mat<T> backward(const Mat<T>& dy) = 0;
  virtual std::vector<ParamRef<T>> params() { return {}; }
  /// Non-trainable state that must be checkpointed.
  virtual std::vector<Mat<T>*> buffers() { return {}; }
  virtual bool stochastic() const { return false; }

  Shape input_shape() const { return in_; }

 protected:
  Shape in_;
};

/// Stride-1 2-D convolution with bias and optional ReLU.
template <class T>
class Conv2D final : public Layer<T> {
 public:
  Conv2D(Shape in, int filters, int kh, int kw, bool same, Activation act, Rng& rng)
      : Layer<T>(in), geo_(ConvGeometry::make(in, kh, kw, same)), act_(act) {
    if (filters <= 0) throw std::invalid_argument("conv2d filters must be positive");
    w_.resize(filters, geo_.rows());
    fill_uniform(w_, std::sqrt(6.0 / geo_.rows()), rng);
    b_ = Mat<T>::Zero(filters, 1);
  }
  std::string kind() const override { return "conv2d"; }
  Shape output_shape() const override { return {static_cast<int>(w_.rows()), geo_.oh, geo_.ow}; }

  Mat<T> forward(const Mat<T>& x, Mode, Rng&) override {
    im2col(geo_, x, cols_);
    y_.noalias() = w_ * cols_;
    y_.colwise() += b_.col(0);
    if (act_ == Activation::Relu) y_ = y_.cwiseMax(T(0));
    return y_;
  }
  Mat<T> backward(const Mat<T>& dy) override {
    Mat<T> d = act_ == Activation::Relu ? Mat<T>(dy.cwiseProduct(relu_mask(y_))) : dy;
    gw_.noalias() = d * cols_.transpose();
    gb_ = d.rowwise().sum();
    Mat<T> dcols = w_.transpose() * d;
    Mat<T> dx;
    col2im(geo_, dcols, dx);
    return dx;
  }
  std::vector<ParamRef<T>> params() override { return {{"kernel", &w_, &gw_}, {"bias", &b_, &gb_}}; }

 private:
  ConvGeometry geo_;
  Activation act_;
  Mat<T> w_, b_, gw_, gb_, cols_, y_;
};

/// Fully connected layer on flat inputs (features x batch).
template <class T>
class Dense final : public Layer<T> {
 public:
  Dense(Shape in, int units, Activation act, Rng& rng) : Layer<T>(in), act_(act) {
    if (!in.flat()) throw std::invalid_argument("dense layer needs a flattened input");
    if (units <= 0) throw std::invalid_argument("dense units must be positive");
    w_.resize(units, in.c);
    const double gain = act == Activation::Relu ? 6.0 : 3.0;
    fill_uniform(w_, std::sqrt(gain / in.c), rng);
    b_ = Mat<T>::Zero(units, 1);
  }
  std::string kind() const override { return "dense"; }
  Shape output_shape() const override { return {static_cast<int>(w_.rows()), 1, 1}; }

  Mat<T> forward(const Mat<T>& x, Mode, Rng&) override {
    x_ = x;
    y_.noalias() = w_ * x;
    y_.colwise() += b_.col(0);
    if (act_ == Activation::Relu) y_ = y_.cwiseMax(T(0));
    return y_;
  }
  Mat<T> backward(const Mat<T>& dy) override {
    Mat<T> d = act_ == Activation::Relu ? Mat<T>(dy.cwiseProduct(relu_mask(y_))) : dy;
    gw_.noalias() = d * x_.transpose();
    gb_ = d.rowwise().sum();
    return w_.transpose() * d;
  }
  std::vector<ParamRef<T>> params() override { return {{"kernel", &w_, &gw_}, {"bias", &b_, &gb_}}; }

 private:
  Activation act_;
  Mat<T> w_, b_, gw_, gb_, x_, y_;
};

/// Per-channel batch normalization over all (sample, position) columns.
template <class T>
class BatchNorm final : public Layer<T> {
 public:
  static constexpr double kMomentum = 0.99;
  static constexpr double kEps = 1e-3;

  explicit BatchNorm(Shape in) : Layer<T>(in) {
    gamma_ = Mat<T>::Ones(in.c, 1);
    beta_ = Mat<T>::Zero(in.c, 1);
    running_mean_ = Mat<T>::Zero(in.c, 1);
    running_var_ = Mat<T>::Ones(in.c, 1);
  }
  std::string kind() const override { return "batchnorm"; }
  Shape output_shape() const override { return this->in_; }

  Mat<T> forward(const Mat<T>& x, Mode mode, Rng&) override {
    train_ = mode == Mode::Train;
    const auto n = static_cast<T>(x.cols());
    if (train_) {
      Mat<T> mean = x.rowwise().sum() / n;
      xhat_ = x.colwise() - mean.col(0);
      Mat<T> var = xhat_.array().square().rowwise().sum().matrix() / n;
      inv_std_ = (var.array() + T(kEps)).rsqrt().matrix();
      xhat_ = inv_std_.col(0).asDiagonal() * xhat_;
      running_mean_ = T(kMomentum) * running_mean_ + T(1 - kMomentum) * mean;
      running_var_ = T(kMomentum) * running_var_ + T(1 - kMomentum) * var;
    } else {
      inv_std_ = (running_var_.array() + T(kEps)).rsqrt().matrix();
      xhat_ = inv_std_.col(0).asDiagonal() * (x.colwise() - running_mean_.col(0));
    }
    Mat<T> y = gamma_.col(0).asDiagonal() * xhat_;
    y.colwise() += beta_.col(0);
    return y;
  }
  Mat<T> backward(const Mat<T>& dy) override {
    ggamma_ = dy.cwiseProduct(xhat_).rowwise().sum();
    gbeta_ = dy.rowwise().sum();
    const Mat<T> scale = gamma_.cwiseProduct(inv_std_);
    if (!train_) return scale.col(0).asDiagonal() * dy;
    const auto n = static_cast<T>(dy.cols());
    Mat<T> dx = dy.colwise() - gbeta_.col(0) / n;
    dx -= (ggamma_.col(0) / n).asDiagonal() * xhat_;
    return scale.col(0).asDiagonal() * dx;
  }
  std::vector<ParamRef<T>> params() override { return {{"gamma", &gamma_, &ggamma_}, {"beta", &beta_, &gbeta_}}; }
  std::vector<Mat<T>*> buffers() override { return {&running_mean_, &running_var_}; }

 private:
  bool train_ = false;
  Mat<T> gamma_, beta_, ggamma_, gbeta_, running_mean_, running_var_, xhat_, inv_std_;
};

/// Inverted dropout: kept units are scaled by 1/(1 - rate). Sampled in Train
/// and MonteCarlo modes, identity in Infer mode and for rate 0.
template <class T>
class Dropout final : public Layer<T> {
 public:
  Dropout(Shape in, double rate) : Layer<T>(in), rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  }
  std::string kind() const override { return "dropout"; }
  Shape output_shape() const override { return this->in_; }
  bool stochastic() const override { return rate_ > 0.0; }
  double rate() const { return rate_; }

  Mat<T> forward(const Mat<T>& x, Mode mode, Rng& rng) override {
    active_ = mode != Mode::Infer && rate_ > 0.0;
    if (!active_) return x;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.resize(x.rows(), x.cols());
    for (Eigen::Index k = 0; k < mask_.size(); ++k)
      mask_.data()[k] = unit_uniform(rng) >= rate_ ? keep_scale : T(0);
    return x.cwiseProduct(mask_);
  }
  Mat<T> backward(const Mat<T>& dy) override { return active_ ? Mat<T>(dy.cwiseProduct(mask_)) : dy; }

 private:
  double rate_;
  bool active_ = false;
  Mat<T> mask_;
};

/// (C x P*B) -> (C*P x B), a reinterpretation of the same buffer.
template <class T>
class Flatten final : public Layer<T> {
 public:
  explicit Flatten(Shape in) : Layer<T>(in) {}
  std::string kind() const override { return "flatten"; }
  Shape output_shape() const override { return {this->in_.size(), 1, 1}; }
  Mat<T> forward(const Mat<T>& x, Mode, Rng&) override {
    return Eigen::Map<const Mat<T>>(x.data(), this->in_.size(), x.cols() / this->in_.positions());
  }
  Mat<T> backward(const Mat<T>& dy) override {
    return Eigen::Map<const Mat<T>>(dy.data(), this->in_.c, dy.cols() * this->in_.positions());
  }
};

}  // namespace windfd::nn
