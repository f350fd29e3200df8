#pragma once

#include <cmath>
#include <vector>

#include "windfd/nn/tensor.hpp"

namespace windfd::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// Adam with the bias correction folded into the step size.
template <class T>
class Adam {
 public:
  Adam(std::vector<ParamRef<T>> params, AdamConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
      m_.push_back(Mat<T>::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Mat<T>::Zero(p.value->rows(), p.value->cols()));
    }
  }

  void step() {
    ++t_;
    const double lr_t = cfg_.learning_rate * std::sqrt(1.0 - std::pow(cfg_.beta2, t_)) /
                        (1.0 - std::pow(cfg_.beta1, t_));
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T lr = static_cast<T>(lr_t), eps = static_cast<T>(cfg_.epsilon);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const auto& g = params_[k].grad->array();
      m_[k].array() = b1 * m_[k].array() + (T(1) - b1) * g;
      v_[k].array() = b2 * v_[k].array() + (T(1) - b2) * g.square();
      params_[k].value->array() -= lr * m_[k].array() / (v_[k].array().sqrt() + eps);
    }
  }

  long iterations() const { return t_; }

 private:
  std::vector<ParamRef<T>> params_;
  AdamConfig cfg_;
  std::vector<Mat<T>> m_, v_;
  long t_ = 0;
};

}  // namespace windfd::nn
