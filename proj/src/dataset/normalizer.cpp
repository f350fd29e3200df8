#include "windfd/dataset/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace windfd::dataset {

namespace {

struct Accumulator {
  std::array<double, kChannels> sum{};
  std::array<double, kChannels> sumsq{};
  std::size_t rows = 0;

  void add(const float* row_major, std::size_t n_rows) {
    for (std::size_t r = 0; r < n_rows; ++r)
      for (int c = 0; c < kChannels; ++c) sum[c] += row_major[r * kChannels + c];
    rows += n_rows;
  }
  void add_sq(const float* row_major, std::size_t n_rows, const std::array<double, kChannels>& mean) {
    for (std::size_t r = 0; r < n_rows; ++r)
      for (int c = 0; c < kChannels; ++c) {
        const double d = row_major[r * kChannels + c] - mean[c];
        sumsq[c] += d * d;
      }
  }
};

NormalizationStats finish(const Accumulator& acc, const std::array<double, kChannels>& mean) {
  NormalizationStats s;
  s.mean = mean;
  for (int c = 0; c < kChannels; ++c) {
    const double sd = std::sqrt(acc.sumsq[c] / static_cast<double>(acc.rows));
    s.std[c] = sd > NormalizationStats::kMinStd ? sd : 1.0;
  }
  return s;
}

}  // namespace

nlohmann::json NormalizationStats::to_json() const { return {{"mean", mean}, {"std", std}}; }

NormalizationStats NormalizationStats::from_json(const nlohmann::json& j) {
  NormalizationStats s;
  s.mean = j.at("mean").get<std::array<double, kChannels>>();
  s.std = j.at("std").get<std::array<double, kChannels>>();
  return s;
}

NormalizationStats fit_normalizer(const WindowSet& set, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("cannot fit a normalizer on zero windows");
  const auto rows = static_cast<std::size_t>(set.window_length);
  Accumulator acc;
  for (std::size_t i : indices) acc.add(set.window(i), rows);
  std::array<double, kChannels> mean{};
  for (int c = 0; c < kChannels; ++c) mean[c] = acc.sum[c] / static_cast<double>(acc.rows);
  for (std::size_t i : indices) acc.add_sq(set.window(i), rows, mean);
  return finish(acc, mean);
}

NormalizationStats fit_normalizer(std::span<const float> values) {
  if (values.empty() || values.size() % kChannels != 0)
    throw std::invalid_argument("normalizer input must be a non-empty rows x 5 buffer");
  const std::size_t rows = values.size() / kChannels;
  Accumulator acc;
  acc.add(values.data(), rows);
  std::array<double, kChannels> mean{};
  for (int c = 0; c < kChannels; ++c) mean[c] = acc.sum[c] / static_cast<double>(rows);
  acc.add_sq(values.data(), rows, mean);
  return finish(acc, mean);
}

void apply_normalizer(const NormalizationStats& stats, std::span<float> values) {
  if (values.size() % kChannels != 0) throw std::invalid_argument("buffer is not rows x 5");
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto c = k % kChannels;
    values[k] = static_cast<float>((values[k] - stats.mean[c]) / stats.std[c]);
  }
}

std::vector<float> gather_normalized(const WindowSet& set, std::span<const std::size_t> indices,
                                     const NormalizationStats& stats) {
  const std::size_t per = set.window_values();
  std::vector<float> out(indices.size() * per);
  for (std::size_t k = 0; k < indices.size(); ++k)
    std::copy_n(set.window(indices[k]), per, out.data() + k * per);
  apply_normalizer(stats, out);
  return out;
}

}  // namespace windfd::dataset
