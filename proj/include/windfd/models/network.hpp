#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "windfd/common/random.hpp"
#include "windfd/models/model_spec.hpp"
#include "windfd/nn/convlstm.hpp"
#include "windfd/nn/layers.hpp"

namespace windfd::models {

using Matf = nn::Mat<float>;

/// Intermediate features captured during a forward pass: the concatenated
/// branch outputs and the input of the final classification layer.
struct Taps {
  Matf fusion1;
  Matf fusion2;
};

/// A classifier built from a ModelSpec. Inputs are `batch` samples of
/// spec().input.sample_values() contiguous floats; outputs are logits
/// (n_classes x batch).
class Network {
 public:
  Network(ModelSpec spec, std::uint64_t seed);
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  ~Network();

  const ModelSpec& spec() const { return spec_; }
  int sample_values() const { return spec_.input.sample_values(); }

  Matf forward(const float* x, Eigen::Index batch, nn::Mode mode, Rng& rng, Taps* taps = nullptr);
  /// Backpropagates d(loss)/d(logits) of the last forward call into the
  /// parameter gradients.
  void backward(const Matf& dlogits);

  /// Softmax of a deterministic (Infer) pass.
  Matf predict_proba(const float* x, Eigen::Index batch);

  /// Runs the deterministic part of a MonteCarlo pass once and caches it;
  /// mc_logits then recomputes only layers downstream of sampled dropout.
  void mc_prepare(const float* x, Eigen::Index batch);
  Matf mc_logits(Rng& rng);

  std::vector<nn::ParamRef<float>> params();
  std::vector<Matf*> buffers();
  std::size_t parameter_count() const { return parameter_count_; }
  /// FNV-1a over all parameter and buffer bytes.
  std::uint64_t checksum();

  /// Flat width of each branch output, in fusion order.
  std::vector<Eigen::Index> branch_widths() const;

 private:
  struct Stack;
  struct Branch;

  Matf run_stack(Stack& s, const Matf& x, nn::Mode mode, Rng& rng, std::size_t from, std::size_t to);
  Matf backward_stack(Stack& s, Matf d);
  std::vector<Matf> frames(const float* x, Eigen::Index batch) const;
  void invalidate();

  ModelSpec spec_;
  std::vector<std::unique_ptr<Branch>> branches_;
  std::vector<std::unique_ptr<Stack>> blocks_;
  std::unique_ptr<Stack> head_;
  std::size_t parameter_count_ = 0;
  std::vector<Eigen::Index> block_widths_;
};

}  // namespace windfd::models
