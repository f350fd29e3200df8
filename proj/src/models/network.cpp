#include "windfd/models/network.hpp"

#include <cstring>
#include <stdexcept>

#include "windfd/common/hashing.hpp"
#include "windfd/nn/fuse.hpp"
#include "windfd/nn/loss.hpp"

namespace windfd::models {

using nn::Mode;
using nn::Shape;

struct Network::Stack {
  std::vector<std::unique_ptr<nn::Layer<float>>> layers;
  std::size_t first_stochastic = 0;
  Shape out;
  Matf cache;
  bool cache_valid = false;

  bool stochastic() const { return first_stochastic < layers.size(); }
};

struct Network::Branch {
  std::vector<std::unique_ptr<nn::ConvLstm<float>>> recurrent;
  Stack stack;
};

namespace {

nn::Activation activation_of(const LayerSpec& l) {
  return l.activation == "relu" ? nn::Activation::Relu : nn::Activation::Linear;
}

}  // namespace

Network::Network(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(derive_seed(seed, "init"));

  auto build_stack = [&rng](Stack& s, const std::vector<LayerSpec>& specs, std::size_t begin, Shape in,
                            const std::string& where) {
    Shape shape = in;
    for (std::size_t k = begin; k < specs.size(); ++k) {
      const auto& l = specs[k];
      const std::string tag = where + " layer " + std::to_string(k + 1) + " (" + l.type + ")";
      std::unique_ptr<nn::Layer<float>> layer;
      try {
        if (l.type == "conv2d")
          layer = std::make_unique<nn::Conv2D<float>>(shape, l.units, l.kernel_h, l.kernel_w,
                                                      l.padding == "same", activation_of(l), rng);
        else if (l.type == "dense")
          layer = std::make_unique<nn::Dense<float>>(shape, l.units, activation_of(l), rng);
        else if (l.type == "batchnorm")
          layer = std::make_unique<nn::BatchNorm<float>>(shape);
        else if (l.type == "dropout")
          layer = std::make_unique<nn::Dropout<float>>(shape, l.rate);
        else if (l.type == "flatten")
          layer = std::make_unique<nn::Flatten<float>>(shape);
        else
          throw std::invalid_argument("layer type not allowed here");
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(tag + ": " + e.what());
      }
      shape = layer->output_shape();
      s.layers.push_back(std::move(layer));
    }
    s.first_stochastic = s.layers.size();
    for (std::size_t k = 0; k < s.layers.size(); ++k)
      if (s.layers[k]->stochastic()) {
        s.first_stochastic = k;
        break;
      }
    s.out = shape;
    if (!shape.flat()) throw std::invalid_argument(where + " does not end flat; add a flatten layer");
  };

  const Shape frame{spec_.input.channels, spec_.input.height, spec_.input.width};
  std::vector<Eigen::Index> widths;
  for (std::size_t b = 0; b < spec_.branches.size(); ++b) {
    const auto& layers = spec_.branches[b];
    auto branch = std::make_unique<Branch>();
    Shape shape = frame;
    std::size_t k = 0;
    std::size_t n_rec = 0;
    while (n_rec < layers.size() && layers[n_rec].type == "convlstm") ++n_rec;
    if (n_rec == 0 && spec_.input.steps != 1)
      throw std::invalid_argument("branch " + std::to_string(b + 1) + " needs a recurrent layer for a sequence input");
    for (; k < n_rec; ++k) {
      const auto& l = layers[k];
      branch->recurrent.push_back(std::make_unique<nn::ConvLstm<float>>(
          shape, l.units, l.kernel_h, l.kernel_w, k + 1 < n_rec, l.peepholes, rng,
          l.activation == "relu" ? nn::CellActivation::Relu : nn::CellActivation::Tanh));
      shape = branch->recurrent.back()->output_shape();
    }
    build_stack(branch->stack, layers, k, shape, "branch " + std::to_string(b + 1));
    widths.push_back(branch->stack.out.c);
    branches_.push_back(std::move(branch));
  }

  Eigen::Index fusion1 = 0;
  for (auto w : widths) fusion1 += w;
  Shape head_in{static_cast<int>(fusion1), 1, 1};
  if (spec_.fusion == "two_step") {
    widths.push_back(fusion1);
    Eigen::Index fusion2 = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      auto s = std::make_unique<Stack>();
      build_stack(*s, spec_.block, 0, {static_cast<int>(widths[i]), 1, 1}, "block " + std::to_string(i + 1));
      block_widths_.push_back(s->out.c);
      fusion2 += s->out.c;
      blocks_.push_back(std::move(s));
    }
    head_in = {static_cast<int>(fusion2), 1, 1};
  }
  head_ = std::make_unique<Stack>();
  build_stack(*head_, spec_.head, 0, head_in, "head");

  for (auto& p : params()) parameter_count_ += static_cast<std::size_t>(p.value->size());
}

Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;
Network::~Network() = default;

std::vector<Eigen::Index> Network::branch_widths() const {
  std::vector<Eigen::Index> w;
  for (const auto& b : branches_) w.push_back(b->stack.out.c);
  return w;
}

std::vector<Matf> Network::frames(const float* x, Eigen::Index batch) const {
  const InputSpec& in = spec_.input;
  const Eigen::Index frame = in.frame_values();
  const Eigen::Index sample = in.sample_values();
  std::vector<Matf> f(static_cast<std::size_t>(in.steps));
  for (int s = 0; s < in.steps; ++s) {
    Matf& m = f[static_cast<std::size_t>(s)];
    m.resize(in.channels, batch * in.height * in.width);
    for (Eigen::Index b = 0; b < batch; ++b)
      std::memcpy(m.data() + b * frame, x + b * sample + s * frame, sizeof(float) * static_cast<std::size_t>(frame));
  }
  return f;
}

Matf Network::run_stack(Stack& s, const Matf& x, Mode mode, Rng& rng, std::size_t from, std::size_t to) {
  Matf h = x;
  for (std::size_t k = from; k < to; ++k) h = s.layers[k]->forward(h, mode, rng);
  return h;
}

Matf Network::backward_stack(Stack& s, Matf d) {
  for (std::size_t k = s.layers.size(); k-- > 0;) d = s.layers[k]->backward(d);
  return d;
}

void Network::invalidate() {
  for (auto& b : branches_) b->stack.cache_valid = false;
  for (auto& s : blocks_) s->cache_valid = false;
  head_->cache_valid = false;
}

Matf Network::forward(const float* x, Eigen::Index batch, Mode mode, Rng& rng, Taps* taps) {
  if (batch <= 0) throw std::invalid_argument("batch must be positive");
  invalidate();
  const auto f = frames(x, batch);
  std::vector<Matf> outs;
  for (auto& br : branches_) {
    Matf in;
    if (br->recurrent.empty()) {
      in = f[0];
    } else {
      std::vector<Matf> seq = f;
      for (auto& cell : br->recurrent) seq = cell->forward(seq);
      in = std::move(seq.back());
    }
    outs.push_back(run_stack(br->stack, in, mode, rng, 0, br->stack.layers.size()));
  }
  Matf fusion1 = nn::fuse(outs);
  Matf head_in;
  if (spec_.fusion == "two_step") {
    std::vector<Matf> bouts;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Matf& in = i < outs.size() ? outs[i] : fusion1;
      bouts.push_back(run_stack(*blocks_[i], in, mode, rng, 0, blocks_[i]->layers.size()));
    }
    head_in = nn::fuse(bouts);
  } else {
    head_in = fusion1;
  }
  const std::size_t n_head = head_->layers.size();
  Matf last_in = run_stack(*head_, head_in, mode, rng, 0, n_head - 1);
  Matf logits = head_->layers.back()->forward(last_in, mode, rng);
  if (taps) {
    taps->fusion1 = std::move(fusion1);
    taps->fusion2 = std::move(last_in);
  }
  return logits;
}

void Network::backward(const Matf& dlogits) {
  Matf d = backward_stack(*head_, dlogits);
  std::vector<Matf> d_out;
  const auto widths = branch_widths();
  if (spec_.fusion == "two_step") {
    auto d_blocks = nn::split_rows(d, block_widths_);
    std::vector<Matf> d_in;
    for (std::size_t i = 0; i < blocks_.size(); ++i) d_in.push_back(backward_stack(*blocks_[i], d_blocks[i]));
    d_out = nn::split_rows(d_in.back(), widths);
    for (std::size_t k = 0; k < d_out.size(); ++k) d_out[k] += d_in[k];
  } else {
    d_out = nn::split_rows(d, widths);
  }
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    auto& br = *branches_[k];
    Matf dx = backward_stack(br.stack, std::move(d_out[k]));
    if (br.recurrent.empty()) continue;
    std::vector<Matf> dseq{std::move(dx)};
    for (std::size_t r = br.recurrent.size(); r-- > 0;) dseq = br.recurrent[r]->backward(dseq);
  }
}

Matf Network::predict_proba(const float* x, Eigen::Index batch) {
  Rng unused(0);
  return nn::softmax(forward(x, batch, Mode::Infer, unused));
}

void Network::mc_prepare(const float* x, Eigen::Index batch) {
  if (batch <= 0) throw std::invalid_argument("batch must be positive");
  invalidate();
  Rng unused(0);
  const auto f = frames(x, batch);
  bool deterministic = true;
  std::vector<Matf> outs;
  for (auto& br : branches_) {
    Matf in;
    if (br->recurrent.empty()) {
      in = f[0];
    } else {
      std::vector<Matf> seq = f;
      for (auto& cell : br->recurrent) seq = cell->forward(seq);
      in = std::move(seq.back());
    }
    Stack& s = br->stack;
    s.cache = run_stack(s, in, Mode::MonteCarlo, unused, 0, s.first_stochastic);
    s.cache_valid = true;
    deterministic = deterministic && !s.stochastic();
    outs.push_back(s.cache);
  }
  if (!deterministic) return;
  Matf fusion1 = nn::fuse(outs);
  Matf head_in;
  if (spec_.fusion == "two_step") {
    std::vector<Matf> bouts;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      Stack& s = *blocks_[i];
      const Matf& in = i < outs.size() ? outs[i] : fusion1;
      s.cache = run_stack(s, in, Mode::MonteCarlo, unused, 0, s.first_stochastic);
      s.cache_valid = true;
      deterministic = deterministic && !s.stochastic();
      bouts.push_back(s.cache);
    }
    if (!deterministic) return;
    head_in = nn::fuse(bouts);
  } else {
    head_in = std::move(fusion1);
  }
  head_->cache = run_stack(*head_, head_in, Mode::MonteCarlo, unused, 0, head_->first_stochastic);
  head_->cache_valid = true;
}

Matf Network::mc_logits(Rng& rng) {
  auto run = [&](Stack& s, const Matf* in) {
    if (s.cache_valid) return run_stack(s, s.cache, Mode::MonteCarlo, rng, s.first_stochastic, s.layers.size());
    return run_stack(s, *in, Mode::MonteCarlo, rng, 0, s.layers.size());
  };
  std::vector<Matf> outs;
  for (auto& br : branches_) {
    if (!br->stack.cache_valid) throw std::logic_error("mc_logits called before mc_prepare");
    outs.push_back(run(br->stack, nullptr));
  }
  Matf fusion1 = nn::fuse(outs);
  if (spec_.fusion == "two_step") {
    std::vector<Matf> bouts;
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      bouts.push_back(run(*blocks_[i], i < outs.size() ? &outs[i] : &fusion1));
    Matf fusion2 = nn::fuse(bouts);
    return run(*head_, &fusion2);
  }
  return run(*head_, &fusion1);
}

std::vector<nn::ParamRef<float>> Network::params() {
  std::vector<nn::ParamRef<float>> out;
  auto add_stack = [&out](Stack& s, const std::string& prefix) {
    for (std::size_t k = 0; k < s.layers.size(); ++k)
      for (auto p : s.layers[k]->params()) {
        p.name = prefix + "." + std::to_string(k) + "." + p.name;
        out.push_back(p);
      }
  };
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    const std::string prefix = "branch" + std::to_string(b);
    for (std::size_t r = 0; r < branches_[b]->recurrent.size(); ++r)
      for (auto p : branches_[b]->recurrent[r]->params()) {
        p.name = prefix + ".convlstm" + std::to_string(r) + "." + p.name;
        out.push_back(p);
      }
    add_stack(branches_[b]->stack, prefix);
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) add_stack(*blocks_[i], "block" + std::to_string(i));
  add_stack(*head_, "head");
  return out;
}

std::vector<Matf*> Network::buffers() {
  std::vector<Matf*> out;
  auto add = [&out](Stack& s) {
    for (auto& l : s.layers)
      for (auto* b : l->buffers()) out.push_back(b);
  };
  for (auto& b : branches_) add(b->stack);
  for (auto& s : blocks_) add(*s);
  add(*head_);
  return out;
}

std::uint64_t Network::checksum() {
  Fnv1a h;
  for (const auto& p : params()) h.update(p.value->data(), sizeof(float) * static_cast<std::size_t>(p.value->size()));
  for (const auto* b : buffers()) h.update(b->data(), sizeof(float) * static_cast<std::size_t>(b->size()));
  return h.digest();
}

}  // namespace windfd::models
