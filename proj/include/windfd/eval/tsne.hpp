#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace windfd::eval {

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  int exaggeration_iterations = 250;
  double exaggeration = 12.0;
  /// Non-positive selects max(n / exaggeration / 4, 50).
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Exact t-SNE of `n` row-major points with `dim` features into 2-D.
/// Returns n x 2 row-major. O(n^2) memory and time per iteration.
/// Throws std::invalid_argument when n <= 3 * perplexity, a feature is not
/// finite, or every point is identical.
std::vector<double> tsne_embed(std::span<const double> features, std::size_t n, std::size_t dim,
                               const TsneOptions& options = {});

/// Mean silhouette coefficient under Euclidean distance. Points whose
/// cluster has a single member score 0. Needs at least two labels.
double silhouette_score(std::span<const double> points, std::size_t n, std::size_t dim,
                        std::span<const int> labels);

}  // namespace windfd::eval
