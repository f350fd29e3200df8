#include "windfd/uq/mc_dropout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "windfd/common/random.hpp"
#include "windfd/nn/loss.hpp"

namespace windfd::uq {

namespace {

struct Welford {
  std::vector<double> mean, m2;
  long n = 0;

  explicit Welford(std::size_t classes) : mean(classes, 0.0), m2(classes, 0.0) {}
  void add(const double* row) {
    ++n;
    for (std::size_t c = 0; c < mean.size(); ++c) {
      const double d = row[c] - mean[c];
      mean[c] += d / static_cast<double>(n);
      m2[c] += d * (row[c] - mean[c]);
    }
  }
  PredictionDistribution finish() const {
    PredictionDistribution p;
    p.mean_probs = mean;
    p.class_std.resize(mean.size());
    for (std::size_t c = 0; c < mean.size(); ++c) p.class_std[c] = std::sqrt(m2[c] / static_cast<double>(n));
    p.predicted_class = argmax(p.mean_probs);
    p.entropy = entropy(p.mean_probs);
    return p;
  }
};

void check_inputs(const models::Network& net, std::span<const float> inputs) {
  const auto per = static_cast<std::size_t>(net.sample_values());
  if (inputs.size() % per != 0) throw std::invalid_argument("input buffer is not a whole number of samples");
}

}  // namespace

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

PredictionDistribution summarize_passes(const std::vector<std::vector<double>>& passes, bool retain) {
  if (passes.empty()) throw std::invalid_argument("need at least one pass");
  Welford w(passes[0].size());
  for (const auto& p : passes) {
    if (p.size() != passes[0].size()) throw std::invalid_argument("passes disagree on class count");
    w.add(p.data());
  }
  PredictionDistribution d = w.finish();
  if (retain) d.pass_probs = passes;
  return d;
}

std::vector<PredictionDistribution> mc_predict(models::Network& net, std::span<const float> inputs,
                                               const McOptions& options) {
  if (options.k < 1) throw std::invalid_argument("K must be at least 1, got " + std::to_string(options.k));
  if (options.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  check_inputs(net, inputs);
  const auto per = static_cast<std::size_t>(net.sample_values());
  const std::size_t n = inputs.size() / per;
  const auto classes = static_cast<std::size_t>(net.spec().n_classes);

  std::vector<PredictionDistribution> out;
  out.reserve(n);
  std::uint64_t batch_index = 0;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(options.batch_size), ++batch_index) {
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(options.batch_size), n - start);
    net.mc_prepare(inputs.data() + start * per, static_cast<Eigen::Index>(m));
    std::vector<Welford> acc(m, Welford(classes));
    std::vector<std::vector<std::vector<double>>> kept(options.retain_passes ? m : 0);
    const std::uint64_t batch_seed = derive_seed(options.seed, "mc-batch", batch_index);
    std::vector<double> row(classes);
    for (int k = 0; k < options.k; ++k) {
      Rng rng(derive_seed(batch_seed, static_cast<std::uint64_t>(k)));
      const models::Matf probs = nn::softmax(net.mc_logits(rng));
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t c = 0; c < classes; ++c)
          row[c] = static_cast<double>(probs(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)));
        acc[j].add(row.data());
        if (options.retain_passes) kept[j].push_back(row);
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      out.push_back(acc[j].finish());
      if (options.retain_passes) out.back().pass_probs = std::move(kept[j]);
    }
  }
  return out;
}

std::vector<PredictionDistribution> deterministic_predict(models::Network& net, std::span<const float> inputs,
                                                          int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  check_inputs(net, inputs);
  const auto per = static_cast<std::size_t>(net.sample_values());
  const std::size_t n = inputs.size() / per;
  const auto classes = static_cast<std::size_t>(net.spec().n_classes);
  std::vector<PredictionDistribution> out;
  out.reserve(n);
  std::vector<double> row(classes);
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(batch_size), n - start);
    const models::Matf probs = net.predict_proba(inputs.data() + start * per, static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      Welford w(classes);
      for (std::size_t c = 0; c < classes; ++c)
        row[c] = static_cast<double>(probs(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)));
      w.add(row.data());
      out.push_back(w.finish());
    }
  }
  return out;
}

nlohmann::json UncertaintySummary::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"n_correct", n_correct},
          {"n_incorrect", n_incorrect},
          {"mean_entropy", num(mean_entropy)},
          {"mean_entropy_correct", num(mean_entropy_correct)},
          {"mean_entropy_incorrect", num(mean_entropy_incorrect)},
          {"bin_edges", bin_edges},
          {"hist_correct", hist_correct},
          {"hist_incorrect", hist_incorrect}};
}

UncertaintySummary UncertaintySummary::from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  UncertaintySummary s;
  s.n_correct = j.at("n_correct").get<std::size_t>();
  s.n_incorrect = j.at("n_incorrect").get<std::size_t>();
  s.mean_entropy = num(j.at("mean_entropy"));
  s.mean_entropy_correct = num(j.at("mean_entropy_correct"));
  s.mean_entropy_incorrect = num(j.at("mean_entropy_incorrect"));
  s.bin_edges = j.at("bin_edges").get<std::vector<double>>();
  s.hist_correct = j.at("hist_correct").get<std::vector<std::size_t>>();
  s.hist_incorrect = j.at("hist_incorrect").get<std::vector<std::size_t>>();
  return s;
}

UncertaintySummary uncertainty_report(const std::vector<PredictionDistribution>& dists, std::span<const int> labels,
                                      int bins) {
  if (dists.size() != labels.size())
    throw std::invalid_argument("distributions (" + std::to_string(dists.size()) + ") and labels (" +
                                std::to_string(labels.size()) + ") differ in length");
  if (bins < 1) throw std::invalid_argument("bins must be positive");
  UncertaintySummary s;
  const std::size_t classes = dists.empty() ? 8 : dists[0].mean_probs.size();
  const double top = std::log(static_cast<double>(classes));
  for (int b = 0; b <= bins; ++b) s.bin_edges.push_back(top * b / bins);
  s.hist_correct.assign(static_cast<std::size_t>(bins), 0);
  s.hist_incorrect.assign(static_cast<std::size_t>(bins), 0);
  double sum = 0.0, sum_c = 0.0, sum_i = 0.0;
  for (std::size_t k = 0; k < dists.size(); ++k) {
    const double h = dists[k].entropy;
    const auto bin = static_cast<std::size_t>(std::clamp(static_cast<int>(h / top * bins), 0, bins - 1));
    sum += h;
    if (dists[k].predicted_class == labels[k]) {
      ++s.n_correct;
      sum_c += h;
      ++s.hist_correct[bin];
    } else {
      ++s.n_incorrect;
      sum_i += h;
      ++s.hist_incorrect[bin];
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean_entropy = dists.empty() ? nan : sum / static_cast<double>(dists.size());
  s.mean_entropy_correct = s.n_correct ? sum_c / static_cast<double>(s.n_correct) : nan;
  s.mean_entropy_incorrect = s.n_incorrect ? sum_i / static_cast<double>(s.n_incorrect) : nan;
  return s;
}

}  // namespace windfd::uq
