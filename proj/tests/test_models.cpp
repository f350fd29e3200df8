#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "test_support.hpp"
#include "windfd/common/errors.hpp"
#include "windfd/common/random.hpp"
#include "windfd/models/checkpoint.hpp"
#include "windfd/models/model_spec.hpp"
#include "windfd/models/network.hpp"
#include "windfd/models/trainer.hpp"
#include "windfd/nn/convlstm.hpp"
#include "windfd/nn/fuse.hpp"
#include "windfd/nn/layers.hpp"
#include "windfd/nn/loss.hpp"

using namespace windfd;
using namespace windfd::models;
using nn::Mat;

namespace {

Mat<double> random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat<double> m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
  return m;
}

double rel_diff(double a, double b) {
  const double d = std::abs(a - b);
  const double s = std::max(std::abs(a), std::abs(b));
  return s < 1e-7 ? d : d / s;
}

// Loss = sum over steps of <R_t, y_t>, so d(loss)/d(y_t) = R_t.
struct LstmProbe {
  nn::ConvLstm<double>& cell;
  std::vector<Mat<double>> xs, rs;

  double loss() {
    const auto ys = cell.forward(xs);
    double l = 0.0;
    for (std::size_t t = 0; t < ys.size(); ++t) l += ys[t].cwiseProduct(rs[t]).sum();
    return l;
  }
};

std::vector<float> random_inputs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("convlstm gradients match central differences") {
    for (auto act : {nn::CellActivation::Tanh, nn::CellActivation::Relu}) {
      Rng init(3);
      nn::ConvLstm<double> cell({2, 1, 4}, 3, 1, 3, true, true, init, act);
      std::mt19937_64 rng(11);
      for (auto& p : cell.params()) *p.value = random_mat(p.value->rows(), p.value->cols(), rng, 0.5);
      LstmProbe probe{cell, {}, {}};
      const int B = 2;
      for (int t = 0; t < 2; ++t) {
        probe.xs.push_back(random_mat(2, 4 * B, rng));
        probe.rs.push_back(random_mat(3, 4 * B, rng));
      }
      probe.loss();
      const auto dxs = cell.backward(probe.rs);
      const double eps = 1e-3;
      double worst = 0.0;
      for (auto& p : cell.params()) {
        const Mat<double> grad = *p.grad;
        for (Eigen::Index k = 0; k < p.value->size(); k += 3) {
          double& w = p.value->data()[k];
          const double keep = w;
          w = keep + eps;
          const double up = probe.loss();
          w = keep - eps;
          const double down = probe.loss();
          w = keep;
          worst = std::max(worst, rel_diff(grad.data()[k], (up - down) / (2 * eps)));
        }
      }
      for (std::size_t t = 0; t < probe.xs.size(); ++t)
        for (Eigen::Index k = 0; k < probe.xs[t].size(); ++k) {
          double& x = probe.xs[t].data()[k];
          const double keep = x;
          x = keep + eps;
          const double up = probe.loss();
          x = keep - eps;
          const double down = probe.loss();
          x = keep;
          worst = std::max(worst, rel_diff(dxs[t].data()[k], (up - down) / (2 * eps)));
        }
      CHECK(worst <= 1e-4);
    }
  }

  TEST_CASE("convlstm cell state is constant with saturated forget and input gates") {
    Rng init(5);
    nn::ConvLstm<double> cell({2, 1, 4}, 3, 1, 3, true, true, init);
    auto ps = cell.params();
    Mat<double>& b = *ps[2].value;
    b.setZero();
    b.block(3, 0, 3, 1).setConstant(-1e3);  // input gate
    b.block(6, 0, 3, 1).setConstant(1e3);   // forget gate
    std::mt19937_64 rng(2);
    nn::ConvLstm<double>::State s0{random_mat(3, 8, rng), random_mat(3, 8, rng)};
    std::vector<Mat<double>> xs;
    for (int t = 0; t < 4; ++t) xs.push_back(random_mat(2, 8, rng));
    cell.forward(xs, &s0);
    CHECK((cell.final_state().c - s0.c).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("convlstm with all-zero parameters outputs zeros and keeps spatial shape") {
    Rng init(5);
    nn::ConvLstm<double> cell({5, 1, 25}, 4, 1, 5, true, true, init);
    for (auto& p : cell.params()) p.value->setZero();
    std::mt19937_64 rng(2);
    std::vector<Mat<double>> xs;
    for (int t = 0; t < 3; ++t) xs.push_back(random_mat(5, 25 * 2, rng));
    const auto ys = cell.forward(xs);
    REQUIRE(ys.size() == 3);
    for (const auto& y : ys) {
      CHECK(y.rows() == 4);
      CHECK(y.cols() == 50);
      CHECK(y.cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(cell.output_shape() == nn::Shape{4, 1, 25});
    CHECK_THROWS_AS(cell.forward({random_mat(4, 50, rng)}), std::invalid_argument);
    CHECK_THROWS_AS(cell.forward({}), std::invalid_argument);
  }

  TEST_CASE("conv, dense and batch-norm gradients match central differences") {
    std::mt19937_64 rng(7);
    Rng init(1);
    std::vector<std::unique_ptr<nn::Layer<double>>> layers;
    layers.push_back(std::make_unique<nn::Conv2D<double>>(nn::Shape{3, 4, 5}, 2, 3, 2, true, nn::Activation::Relu, init));
    layers.push_back(std::make_unique<nn::Conv2D<double>>(nn::Shape{3, 6, 5}, 2, 4, 5, false, nn::Activation::Linear, init));
    layers.push_back(std::make_unique<nn::Dense<double>>(nn::Shape{6, 1, 1}, 4, nn::Activation::Relu, init));
    layers.push_back(std::make_unique<nn::BatchNorm<double>>(nn::Shape{4, 1, 1}));
    for (auto& layer : layers) {
      const nn::Shape in = layer->input_shape();
      const int B = 3;
      Mat<double> x = random_mat(in.c, in.positions() * B, rng);
      for (auto& p : layer->params()) *p.value = random_mat(p.value->rows(), p.value->cols(), rng, 0.5);
      Rng unused(0);
      const Mat<double> y0 = layer->forward(x, nn::Mode::Train, unused);
      const Mat<double> r = random_mat(y0.rows(), y0.cols(), rng);
      auto loss = [&] { return layer->forward(x, nn::Mode::Train, unused).cwiseProduct(r).sum(); };
      loss();
      const Mat<double> dx = layer->backward(r);
      double worst = 0.0;
      const double eps = 1e-5;
      for (auto& p : layer->params()) {
        const Mat<double> g = *p.grad;
        for (Eigen::Index k = 0; k < p.value->size(); ++k) {
          double& w = p.value->data()[k];
          const double keep = w;
          w = keep + eps;
          const double up = loss();
          w = keep - eps;
          const double down = loss();
          w = keep;
          worst = std::max(worst, rel_diff(g.data()[k], (up - down) / (2 * eps)));
        }
      }
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double keep = x.data()[k];
        x.data()[k] = keep + eps;
        const double up = loss();
        x.data()[k] = keep - eps;
        const double down = loss();
        x.data()[k] = keep;
        worst = std::max(worst, rel_diff(dx.data()[k], (up - down) / (2 * eps)));
      }
      CHECK_MESSAGE(worst <= 1e-5, layer->kind());
    }
  }

  TEST_CASE("softmax cross-entropy gradient") {
    std::mt19937_64 rng(4);
    Mat<double> logits = random_mat(8, 5, rng);
    const std::vector<int> labels{0, 3, 7, 7, 2};
    Mat<double> g;
    const double l = nn::softmax_cross_entropy(logits, labels, g);
    double oracle = 0.0;
    for (int j = 0; j < 5; ++j) {
      double z = 0.0;
      for (int c = 0; c < 8; ++c) z += std::exp(logits(c, j));
      oracle += std::log(z) - logits(labels[static_cast<std::size_t>(j)], j);
    }
    CHECK(l == doctest::Approx(oracle / 5.0).epsilon(1e-12));
    Mat<double> scratch;
    const double eps = 1e-6;
    logits(3, 1) += eps;
    const double up = nn::softmax_cross_entropy(logits, labels, scratch);
    logits(3, 1) -= 2 * eps;
    const double down = nn::softmax_cross_entropy(logits, labels, scratch);
    CHECK(g(3, 1) == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-6));
  }

  TEST_CASE("fuse concatenates in order and records offsets") {
    std::mt19937_64 rng(1);
    const auto a = random_mat(64, 3, rng), b = random_mat(128, 3, rng), c = random_mat(256, 3, rng);
    std::vector<Eigen::Index> offsets;
    const auto f = nn::fuse(std::vector<Mat<double>>{a, b, c}, &offsets);
    CHECK(f.rows() == 448);
    CHECK(offsets == std::vector<Eigen::Index>{0, 64, 192});
    CHECK(f.middleRows(offsets[0], 64) == a);
    CHECK(f.middleRows(offsets[1], 128) == b);
    CHECK(f.middleRows(offsets[2], 256) == c);
    CHECK(nn::fuse(std::vector<Mat<double>>{a}) == a);
    const auto back = nn::split_rows(f, {64, 128, 256});
    CHECK(back[2] == c);
    CHECK_THROWS_AS(nn::fuse(std::vector<Mat<double>>{a, random_mat(4, 2, rng)}), std::invalid_argument);
  }

  TEST_CASE("every architecture outputs normalized eight-class probabilities") {
    for (auto arch : {Architecture::SimpleCnn, Architecture::MultiHeaded, Architecture::Casu2Net}) {
      Network net(ModelSpec::for_architecture(arch), 9);
      for (int batch : {1, 4}) {
        const auto x = random_inputs(static_cast<std::size_t>(batch) * 625, 3);
        const auto p = net.predict_proba(x.data(), batch);
        REQUIRE(p.rows() == 8);
        REQUIRE(p.cols() == batch);
        for (int j = 0; j < batch; ++j) CHECK(std::abs(p.col(j).sum() - 1.0f) <= 1e-5f);
      }
    }
  }

  TEST_CASE("multi-headed fusion width follows the valid-convolution arithmetic") {
    Network net(ModelSpec::multi_headed(), 1);
    const std::vector<Eigen::Index> expect{(125 - 1 + 1) * 100, (125 - 7 + 1) * 90, (125 - 20 + 1) * 80};
    CHECK(net.branch_widths() == expect);
  }

  TEST_CASE("casu2net branches keep the 1 x 25 map") {
    Network net(ModelSpec::casu2net(), 1);
    CHECK(net.branch_widths() == std::vector<Eigen::Index>{32 * 25, 64 * 25, 64 * 25});
    const auto spec = ModelSpec::casu2net();
    CHECK(spec.branches[0].size() == 3);
    CHECK(spec.branches[2][3].units == 64);
    CHECK(spec.branches[2][3].kernel_w == 3);
  }

  TEST_CASE("seeded construction is reproducible") {
    for (auto arch : {Architecture::SimpleCnn, Architecture::Casu2Net}) {
      Network a(ModelSpec::for_architecture(arch), 5), b(ModelSpec::for_architecture(arch), 5),
          c(ModelSpec::for_architecture(arch), 6);
      CHECK(a.checksum() == b.checksum());
      CHECK(a.checksum() != c.checksum());
      CHECK(a.parameter_count() == b.parameter_count());
      CHECK(a.parameter_count() == c.parameter_count());
    }
  }

  TEST_CASE("invalid specs name the offending layer") {
    auto s = ModelSpec::casu2net();
    s.branches[1][2].units = 0;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("branch 2 layer 3"), std::invalid_argument);
    auto t = ModelSpec::simple_cnn();
    t.head.back().units = 5;
    CHECK_THROWS_AS(Network(t, 1), std::invalid_argument);
  }

  TEST_CASE("model specs round-trip through JSON") {
    for (auto arch : {Architecture::SimpleCnn, Architecture::MultiHeaded, Architecture::Casu2Net}) {
      const auto s = ModelSpec::for_architecture(arch);
      CHECK(ModelSpec::from_json(s.to_json()) == s);
      CHECK(parse_architecture(architecture_name(arch)) == arch);
    }
  }

  TEST_CASE("epoch order is a permutation") {
    for (int e = 0; e < 3; ++e) {
      auto order = epoch_order(97, 5, e);
      std::sort(order.begin(), order.end());
      std::vector<std::size_t> all(97);
      std::iota(all.begin(), all.end(), 0);
      CHECK(order == all);
    }
    CHECK(epoch_order(97, 5, 0) != epoch_order(97, 5, 1));
  }

  TEST_CASE("training is deterministic and lowers the loss") {
    // Class-dependent offsets make the labels learnable; 128 batches let the
    // batch-norm running statistics settle within the epoch.
    const std::size_t n = 256;
    auto x = random_inputs(n * 625, 8);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 8);
      for (std::size_t k = 0; k < 625; ++k) x[i * 625 + k] += (k % 5 == static_cast<std::size_t>(y[i] % 5)) ? 0.5f * y[i] : 0.0f;
    }
    const Samples data{x, y};
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 2;
    cfg.seed = 3;
    Network a(ModelSpec::simple_cnn(), 2), b(ModelSpec::simple_cnn(), 2);
    const double before = evaluate(a, data).loss;
    const auto ra = train(a, data, cfg);
    const auto rb = train(b, data, cfg);
    CHECK(ra.back().train_loss == rb.back().train_loss);
    CHECK(a.checksum() == b.checksum());
    CHECK(evaluate(a, data).loss < before);
  }

  TEST_CASE("training aborts on a non-finite loss") {
    auto x = random_inputs(8 * 625, 8);
    x[5] = std::numeric_limits<float>::infinity();
    std::vector<int> y(8, 1);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 8;
    Network net(ModelSpec::simple_cnn(), 2);
    CHECK_THROWS_AS(train(net, Samples{x, y}, cfg), TrainingDiverged);
  }

  TEST_CASE("checkpoints reproduce predictions and guard their contents") {
    test::TempDir dir("ckpt");
    Network net(ModelSpec::casu2net(), 4);
    const auto x = random_inputs(3 * 625, 1);
    const auto before = net.predict_proba(x.data(), 3);
    TrainingMetadata meta;
    meta.epochs = 50;
    meta.batch_size = 32;
    meta.fold = 3;
    meta.seed = 77;
    const auto path = dir.path() / "m.ckpt";
    save_checkpoint(path, capture(net, 4, meta, {}));
    const auto ck = load_checkpoint(path, ModelSpec::casu2net().hash());
    CHECK(ck.metadata == meta);
    auto back = restore(ck);
    CHECK(back.predict_proba(x.data(), 3) == before);
    CHECK_THROWS_AS(load_checkpoint(path, ModelSpec::simple_cnn().hash()), std::invalid_argument);
    {
      std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(-9, std::ios::end);
      f.put('\x01');
    }
    CHECK_THROWS_AS(load_checkpoint(path), ChecksumError);
  }
}
