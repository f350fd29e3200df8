#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace windfd::eval {

/// Row-major feature matrix view (n x d).
struct FeatureView {
  std::span<const float> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct TreeOptions {
  int max_depth = 50;
  int min_samples_split = 2;
  /// Features examined per split; 0 means all.
  int max_features = 0;
  std::uint64_t seed = 0;
};

/// CART classifier with Gini impurity. Splits are "x <= threshold" with the
/// threshold halfway between consecutive distinct values; among equal gains
/// the first examined feature (ascending index) wins. When max_features is
/// set, each split draws that many distinct features and examines them in
/// ascending order.
class DecisionTree {
 public:
  void fit(const FeatureView& x, std::span<const int> labels, int n_classes, const TreeOptions& options,
           std::span<const std::size_t> sample = {});
  /// Class distribution of the leaf reached by row r.
  const std::vector<double>& leaf_distribution(const FeatureView& x, std::size_t r) const;
  int predict(const FeatureView& x, std::size_t r) const;
  std::size_t node_count() const { return nodes_.size(); }
  int depth() const { return depth_; }

 private:
  struct Node {
    int feature = -1;  // -1 for a leaf
    float threshold = 0.0f;
    int left = -1, right = -1;
    std::vector<double> dist;
  };
  int build(const FeatureView& x, std::span<const int> labels, std::vector<std::size_t>& idx, std::size_t begin,
            std::size_t end, int depth, const TreeOptions& options, std::uint64_t& draw);

  std::vector<Node> nodes_;
  int n_classes_ = 0;
  int depth_ = 0;
};

struct ForestOptions {
  int n_estimators = 200;
  int max_depth = 50;
  bool bootstrap = true;
  /// 0 means floor(sqrt(d)); -1 means all features.
  int max_features = 0;
  std::uint64_t seed = 0;
};

/// Bagged CART trees; predictions average the leaf class distributions.
class RandomForest {
 public:
  void fit(const FeatureView& x, std::span<const int> labels, int n_classes, const ForestOptions& options);
  std::vector<double> predict_proba(const FeatureView& x, std::size_t r) const;
  int predict(const FeatureView& x, std::size_t r) const;

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
};

}  // namespace windfd::eval
