#include "windfd/eval/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "windfd/common/random.hpp"

namespace windfd::eval {

namespace {

int argmax_lowest(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return 1.0 - s / (total * total);
}

}  // namespace

void DecisionTree::fit(const FeatureView& x, std::span<const int> labels, int n_classes, const TreeOptions& options,
                       std::span<const std::size_t> sample) {
  if (x.rows != labels.size()) throw std::invalid_argument("feature rows and labels differ in length");
  if (x.values.size() != x.rows * x.cols) throw std::invalid_argument("feature buffer does not match its shape");
  if (n_classes < 1) throw std::invalid_argument("need at least one class");
  if (options.max_depth < 1 || options.min_samples_split < 2)
    throw std::invalid_argument("invalid tree options");
  std::vector<std::size_t> idx;
  if (sample.empty()) {
    idx.resize(x.rows);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    idx.assign(sample.begin(), sample.end());
  }
  if (idx.empty()) throw std::invalid_argument("cannot fit a tree on zero samples");
  for (std::size_t i : idx)
    if (labels[i] < 0 || labels[i] >= n_classes) throw std::invalid_argument("label out of range");
  nodes_.clear();
  n_classes_ = n_classes;
  depth_ = 0;
  std::uint64_t draw = 0;
  build(x, labels, idx, 0, idx.size(), 0, options, draw);
}

int DecisionTree::build(const FeatureView& x, std::span<const int> labels, std::vector<std::size_t>& idx,
                        std::size_t begin, std::size_t end, int depth, const TreeOptions& options,
                        std::uint64_t& draw) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  depth_ = std::max(depth_, depth);
  std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
  for (std::size_t k = begin; k < end; ++k) counts[static_cast<std::size_t>(labels[idx[k]])] += 1.0;
  const double n = static_cast<double>(end - begin);
  const double parent = gini(counts, n);
  {
    std::vector<double> dist = counts;
    for (double& d : dist) d /= n;
    nodes_[static_cast<std::size_t>(id)].dist = std::move(dist);
  }
  if (depth >= options.max_depth || end - begin < static_cast<std::size_t>(options.min_samples_split) || parent == 0.0)
    return id;

  std::vector<std::size_t> features;
  const auto d = static_cast<int>(x.cols);
  if (options.max_features <= 0 || options.max_features >= d) {
    features.resize(x.cols);
    std::iota(features.begin(), features.end(), std::size_t{0});
  } else {
    std::vector<std::size_t> all(x.cols);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(derive_seed(options.seed, "split", draw++));
    for (int k = 0; k < options.max_features; ++k) {
      const auto j = static_cast<std::size_t>(k) + static_cast<std::size_t>(rng() % (x.cols - static_cast<std::size_t>(k)));
      std::swap(all[static_cast<std::size_t>(k)], all[j]);
    }
    features.assign(all.begin(), all.begin() + options.max_features);
    std::sort(features.begin(), features.end());
  }

  double best_gain = 0.0;
  int best_feature = -1;
  float best_threshold = 0.0f;
  std::vector<std::pair<float, int>> column(end - begin);
  std::vector<double> left(static_cast<std::size_t>(n_classes_));
  for (std::size_t f : features) {
    for (std::size_t k = begin; k < end; ++k) column[k - begin] = {x.at(idx[k], f), labels[idx[k]]};
    std::sort(column.begin(), column.end());
    if (column.front().first == column.back().first) continue;
    std::fill(left.begin(), left.end(), 0.0);
    for (std::size_t k = 0; k + 1 < column.size(); ++k) {
      left[static_cast<std::size_t>(column[k].second)] += 1.0;
      if (column[k].first == column[k + 1].first) continue;
      const double nl = static_cast<double>(k + 1);
      const double nr = n - nl;
      double sl = 0.0, sr = 0.0;
      for (std::size_t c = 0; c < left.size(); ++c) {
        sl += left[c] * left[c];
        const double r = counts[c] - left[c];
        sr += r * r;
      }
      const double child = (nl - sl / nl) / n + (nr - sr / nr) / n;
      const double gain = parent - child;
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_feature = static_cast<int>(f);
        best_threshold = column[k].first + (column[k + 1].first - column[k].first) / 2.0f;
        if (!(best_threshold < column[k + 1].first)) best_threshold = column[k].first;
      }
    }
  }
  if (best_feature < 0) return id;

  const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                  idx.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t i) {
                                    return x.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold;
                                  });
  const auto split = static_cast<std::size_t>(mid - idx.begin());
  // Restore ascending order on each side so results do not depend on partition internals.
  std::sort(idx.begin() + static_cast<std::ptrdiff_t>(begin), mid);
  std::sort(mid, idx.begin() + static_cast<std::ptrdiff_t>(end));
  const int l = build(x, labels, idx, begin, split, depth + 1, options, draw);
  const int r = build(x, labels, idx, split, end, depth + 1, options, draw);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = l;
  node.right = r;
  return id;
}

const std::vector<double>& DecisionTree::leaf_distribution(const FeatureView& x, std::size_t r) const {
  if (nodes_.empty()) throw std::logic_error("tree is not fitted");
  const Node* node = &nodes_[0];
  while (node->feature >= 0)
    node = &nodes_[static_cast<std::size_t>(x.at(r, static_cast<std::size_t>(node->feature)) <= node->threshold
                                                ? node->left
                                                : node->right)];
  return node->dist;
}

int DecisionTree::predict(const FeatureView& x, std::size_t r) const { return argmax_lowest(leaf_distribution(x, r)); }

void RandomForest::fit(const FeatureView& x, std::span<const int> labels, int n_classes, const ForestOptions& options) {
  if (options.n_estimators < 1) throw std::invalid_argument("forest needs at least one tree");
  if (x.rows == 0) throw std::invalid_argument("cannot fit a forest on zero samples");
  n_classes_ = n_classes;
  trees_.assign(static_cast<std::size_t>(options.n_estimators), DecisionTree{});
  int max_features = options.max_features;
  if (max_features == 0) max_features = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x.cols))));
  if (max_features < 0) max_features = 0;
  for (int t = 0; t < options.n_estimators; ++t) {
    TreeOptions to;
    to.max_depth = options.max_depth;
    to.max_features = max_features;
    to.seed = derive_seed(options.seed, "tree", static_cast<std::uint64_t>(t));
    std::vector<std::size_t> sample;
    if (options.bootstrap) {
      Rng rng(derive_seed(options.seed, "bootstrap", static_cast<std::uint64_t>(t)));
      sample.resize(x.rows);
      for (auto& s : sample) s = static_cast<std::size_t>(rng() % x.rows);
      std::sort(sample.begin(), sample.end());
    }
    trees_[static_cast<std::size_t>(t)].fit(x, labels, n_classes, to, sample);
  }
}

std::vector<double> RandomForest::predict_proba(const FeatureView& x, std::size_t r) const {
  if (trees_.empty()) throw std::logic_error("forest is not fitted");
  std::vector<double> p(static_cast<std::size_t>(n_classes_), 0.0);
  for (const auto& t : trees_) {
    const auto& d = t.leaf_distribution(x, r);
    for (std::size_t c = 0; c < p.size(); ++c) p[c] += d[c];
  }
  for (double& v : p) v /= static_cast<double>(trees_.size());
  return p;
}

int RandomForest::predict(const FeatureView& x, std::size_t r) const { return argmax_lowest(predict_proba(x, r)); }

}  // namespace windfd::eval
