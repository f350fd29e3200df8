#include "windfd/models/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "windfd/common/errors.hpp"
#include "windfd/common/random.hpp"
#include "windfd/nn/loss.hpp"

namespace windfd::models {

namespace {

void check(const Network& net, const Samples& s, const char* what) {
  const auto per = static_cast<std::size_t>(net.sample_values());
  if (s.x.size() != s.size() * per)
    throw std::invalid_argument(std::string(what) + ": sample buffer does not match the label count");
  for (int l : s.labels)
    if (l < 0 || l >= net.spec().n_classes) throw std::invalid_argument(std::string(what) + ": label out of range");
}

}  // namespace

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "epoch", static_cast<std::uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<EpochRecord> train(Network& net, const Samples& train_set, const TrainConfig& cfg,
                               const Samples* validation, const EpochCallback& on_epoch) {
  if (train_set.size() == 0) throw std::invalid_argument("training set is empty");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw std::invalid_argument("epochs and batch size must be positive");
  check(net, train_set, "training set");
  if (validation) check(net, *validation, "validation set");

  const auto per = static_cast<std::size_t>(net.sample_values());
  nn::Adam<float> adam(net.params(), cfg.adam);
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
  std::vector<float> xb;
  std::vector<int> yb;
  Matf grad;
  std::vector<EpochRecord> history;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = epoch_order(train_set.size(), cfg.seed, epoch);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      ++batch_index;
      const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - start);
      xb.resize(n * per);
      yb.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[start + k];
        std::copy_n(train_set.x.data() + i * per, per, xb.data() + k * per);
        yb[k] = train_set.labels[i];
      }
      const Matf logits = net.forward(xb.data(), static_cast<Eigen::Index>(n), nn::Mode::Train, dropout_rng);
      const double loss = nn::softmax_cross_entropy(logits, std::span<const int>(yb), grad);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch, batch_index);
      net.backward(grad);
      adam.step();
      loss_sum += loss * static_cast<double>(n);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.val_loss = validation ? evaluate(net, *validation).loss : std::numeric_limits<double>::quiet_NaN();
    history.push_back(rec);
    if (on_epoch && !on_epoch(rec)) break;
  }
  return history;
}

LossAccuracy evaluate(Network& net, const Samples& data, int batch_size) {
  check(net, data, "evaluation set");
  if (data.size() == 0) throw std::invalid_argument("evaluation set is empty");
  const auto per = static_cast<std::size_t>(net.sample_values());
  Rng unused(0);
  Matf grad;
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(batch_size), data.size() - start);
    const Matf logits = net.forward(data.x.data() + start * per, static_cast<Eigen::Index>(n), nn::Mode::Infer, unused);
    loss += nn::softmax_cross_entropy(logits, data.labels.subspan(start, n), grad) * static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      Eigen::Index arg;
      logits.col(static_cast<Eigen::Index>(k)).maxCoeff(&arg);
      if (arg == data.labels[start + k]) ++correct;
    }
  }
  return {loss / static_cast<double>(data.size()), static_cast<double>(correct) / static_cast<double>(data.size())};
}

}  // namespace windfd::models
