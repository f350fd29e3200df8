#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "windfd/models/network.hpp"
#include "windfd/uq/mc_dropout.hpp"

using namespace windfd;
using namespace windfd::uq;

namespace {

std::vector<float> inputs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(n * 625);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<double> row(std::initializer_list<double> head) {
  std::vector<double> r(head);
  r.resize(8, 0.0);
  return r;
}

}  // namespace

TEST_SUITE("uq") {
  TEST_CASE("two-pass average and decision") {
    const auto d = summarize_passes({row({0.6, 0.4}), row({0.2, 0.8})});
    CHECK(d.mean_probs[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(d.mean_probs[1] == doctest::Approx(0.6).epsilon(1e-15));
    for (int c = 2; c < 8; ++c) CHECK(d.mean_probs[static_cast<std::size_t>(c)] == 0.0);
    CHECK(d.predicted_class == 1);
    CHECK(d.class_std[0] == doctest::Approx(0.2));
  }

  TEST_CASE("identical passes give zero spread exactly") {
    const auto r = row({0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.1, 0.1});
    const auto d = summarize_passes({r, r, r, r, r});
    CHECK(d.mean_probs == r);
    for (double s : d.class_std) CHECK(s == 0.0);
  }

  TEST_CASE("mean is the average of the retained passes") {
    std::mt19937_64 rng(5);
    std::gamma_distribution<double> g(1.0, 1.0);
    std::vector<std::vector<double>> passes;
    for (int k = 0; k < 37; ++k) {
      std::vector<double> p(8);
      for (auto& v : p) v = g(rng);
      const double s = std::accumulate(p.begin(), p.end(), 0.0);
      for (auto& v : p) v /= s;
      passes.push_back(p);
    }
    const auto d = summarize_passes(passes, true);
    REQUIRE(d.pass_probs.size() == 37);
    for (int c = 0; c < 8; ++c) {
      double m = 0.0;
      for (const auto& p : passes) m += p[static_cast<std::size_t>(c)];
      CHECK(std::abs(d.mean_probs[static_cast<std::size_t>(c)] - m / 37.0) <= 1e-9);
    }
    CHECK(std::abs(std::accumulate(d.mean_probs.begin(), d.mean_probs.end(), 0.0) - 1.0) <= 1e-5);
    // Scaling every pass by a shared positive constant keeps the decision.
    auto scaled = passes;
    for (auto& p : scaled)
      for (auto& v : p) v *= 3.7;
    CHECK(summarize_passes(scaled).predicted_class == d.predicted_class);
  }

  TEST_CASE("entropy and argmax") {
    CHECK(entropy(row({1.0})) == 0.0);
    CHECK(entropy(std::vector<double>(8, 0.125)) == doctest::Approx(std::log(8.0)).epsilon(1e-15));
    const auto p = row({0.5, 0.25, 0.125, 0.125});
    CHECK(std::abs(entropy(p) - (0.5 * std::log(2.0) + 0.25 * std::log(4.0) + 0.25 * std::log(8.0))) <= 1e-9);
    CHECK(argmax(std::vector<double>{0.3, 0.3, 0.4}) == 2);
    CHECK(argmax(std::vector<double>{0.4, 0.2, 0.4}) == 0);
  }

  TEST_CASE("uncertainty report") {
    std::vector<PredictionDistribution> d;
    d.push_back(summarize_passes({row({1.0})}));
    d.push_back(summarize_passes({row({0.0, 1.0})}));
    d.push_back(summarize_passes({std::vector<double>(8, 0.125)}));
    const std::vector<int> labels{0, 0, 3};
    const auto s = uncertainty_report(d, labels);
    CHECK(s.n_correct == 1);  // the uniform row predicts class 0
    CHECK(s.n_incorrect == 2);
    CHECK(s.mean_entropy_correct == 0.0);
    CHECK(s.mean_entropy_incorrect == doctest::Approx(std::log(8.0) / 2.0));
    CHECK(s.bin_edges.size() == 21);
    CHECK(std::accumulate(s.hist_correct.begin(), s.hist_correct.end(), std::size_t{0}) == 1);
    CHECK(std::accumulate(s.hist_incorrect.begin(), s.hist_incorrect.end(), std::size_t{0}) == 2);
    CHECK_THROWS_AS(uncertainty_report(d, std::vector<int>{0, 1}), std::invalid_argument);
    const auto all_certain = uncertainty_report({d[0], d[0]}, std::vector<int>{0, 0});
    CHECK(all_certain.mean_entropy == 0.0);
    CHECK(std::isnan(all_certain.mean_entropy_incorrect));
  }

  TEST_CASE("zero dropout makes every pass the deterministic pass") {
    for (auto arch : {models::Architecture::SimpleCnn, models::Architecture::Casu2Net}) {
      models::Network net(models::ModelSpec::for_architecture(arch).with_dropout(0.0), 3);
      const auto x = inputs(5, 2);
      const auto det = deterministic_predict(net, x);
      McOptions o;
      o.k = 6;
      o.seed = 4;
      o.retain_passes = true;
      const auto mc = mc_predict(net, x, o);
      REQUIRE(mc.size() == 5);
      for (std::size_t i = 0; i < 5; ++i) {
        for (const auto& p : mc[i].pass_probs) CHECK(p == mc[i].pass_probs[0]);
        for (double s : mc[i].class_std) CHECK(s == 0.0);
        CHECK(mc[i].mean_probs == det[i].mean_probs);
      }
    }
  }

  TEST_CASE("a single pass is its own mean") {
    models::Network net(models::ModelSpec::simple_cnn(), 3);
    const auto x = inputs(3, 1);
    McOptions o;
    o.k = 1;
    o.retain_passes = true;
    for (const auto& d : mc_predict(net, x, o)) {
      REQUIRE(d.pass_probs.size() == 1);
      CHECK(d.mean_probs == d.pass_probs[0]);
    }
    o.k = 0;
    CHECK_THROWS_AS(mc_predict(net, x, o), std::invalid_argument);
  }

  TEST_CASE("mc predictions are deterministic in the seed and batch size") {
    models::Network net(models::ModelSpec::casu2net(), 3);
    const auto x = inputs(6, 9);
    McOptions o;
    o.k = 4;
    o.seed = 12;
    const auto a = mc_predict(net, x, o);
    const auto b = mc_predict(net, x, o);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].mean_probs == b[i].mean_probs);
    o.seed = 13;
    const auto c = mc_predict(net, x, o);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].mean_probs != c[i].mean_probs;
    CHECK(differs);
  }

  TEST_CASE("the averaged prediction stabilizes as K grows") {
    models::Network net(models::ModelSpec::simple_cnn(), 8);
    const auto x = inputs(1, 3);
    std::vector<double> spread;
    for (int k : {10, 50, 200}) {
      std::vector<std::vector<double>> means;
      for (std::uint64_t s = 0; s < 20; ++s) {
        McOptions o;
        o.k = k;
        o.seed = 1000 + s;
        means.push_back(mc_predict(net, x, o)[0].mean_probs);
      }
      double total = 0.0;
      for (int c = 0; c < 8; ++c) {
        double m = 0.0, v = 0.0;
        for (const auto& r : means) m += r[static_cast<std::size_t>(c)];
        m /= 20.0;
        for (const auto& r : means) v += (r[static_cast<std::size_t>(c)] - m) * (r[static_cast<std::size_t>(c)] - m);
        total += v / 19.0;
      }
      spread.push_back(total);
    }
    CHECK(spread[0] > 0.0);
    CHECK(spread[1] <= spread[0]);
    CHECK(spread[2] <= spread[1]);
  }
}
