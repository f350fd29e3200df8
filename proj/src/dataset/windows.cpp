#include "windfd/dataset/windows.hpp"

#include <stdexcept>

#include "windfd/common/logging.hpp"

namespace windfd::dataset {

std::size_t window_count(std::size_t rows, int window_length, int stride) {
  if (window_length <= 0) throw std::invalid_argument("window length must be positive");
  if (stride <= 0) throw std::invalid_argument("stride must be positive");
  const auto w = static_cast<std::size_t>(window_length);
  if (rows < w) return 0;
  return (rows - w) / static_cast<std::size_t>(stride) + 1;
}

std::vector<float> slide_windows(const turbsim::SensorTrace& trace, int window_length, int stride) {
  const std::size_t n = window_count(trace.rows(), window_length, stride);
  if (n == 0) {
    log::warn("trace '" + trace.run_id + "' has " + std::to_string(trace.rows()) +
              " rows, fewer than the window length " + std::to_string(window_length));
    return {};
  }
  const std::size_t per = static_cast<std::size_t>(window_length) * kChannels;
  std::vector<float> out(n * per);
  for (std::size_t k = 0; k < n; ++k) {
    const double* src = trace.values.data() + k * static_cast<std::size_t>(stride) * kChannels;
    for (std::size_t v = 0; v < per; ++v) out[k * per + v] = static_cast<float>(src[v]);
  }
  return out;
}

std::size_t WindowSet::add_run(const turbsim::SensorTrace& trace) {
  std::vector<float> w = slide_windows(trace, window_length, stride);
  const std::size_t n = w.size() / window_values();
  const int group = static_cast<int>(run_ids.size());
  run_ids.push_back(trace.run_id);
  run_labels.push_back(trace.label());
  windows.insert(windows.end(), w.begin(), w.end());
  labels.insert(labels.end(), n, trace.label());
  groups.insert(groups.end(), n, group);
  return n;
}

std::vector<std::size_t> WindowSet::class_histogram() const {
  std::vector<std::size_t> h(turbsim::kNumClasses, 0);
  for (int l : labels) ++h[static_cast<std::size_t>(l)];
  return h;
}

void WindowSet::validate() const {
  if (window_length <= 0 || stride <= 0)
    throw std::invalid_argument("window length and stride must be positive");
  if (windows.size() != size() * window_values())
    throw std::invalid_argument("window buffer size does not match the label count");
  if (groups.size() != size()) throw std::invalid_argument("group count does not match the label count");
  if (run_ids.size() != run_labels.size()) throw std::invalid_argument("run table is inconsistent");
  for (std::size_t i = 0; i < size(); ++i) {
    if (labels[i] < 0 || labels[i] >= turbsim::kNumClasses)
      throw std::invalid_argument("label out of range at window " + std::to_string(i));
    if (groups[i] < 0 || static_cast<std::size_t>(groups[i]) >= run_ids.size())
      throw std::invalid_argument("group out of range at window " + std::to_string(i));
    if (run_labels[static_cast<std::size_t>(groups[i])] != labels[i])
      throw std::invalid_argument("window " + std::to_string(i) + " label differs from its run");
  }
}

}  // namespace windfd::dataset
