#include "windfd/eval/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "windfd/common/random.hpp"

namespace windfd::eval {

namespace {

std::vector<double> squared_distances(std::span<const double> x, std::size_t n, std::size_t dim) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = x[i * dim + k] - x[j * dim + k];
        s += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = s;
    }
  return d;
}

// Row-conditional affinities with entropy log(perplexity), by bisection on
// the Gaussian precision.
std::vector<double> conditional_affinities(const std::vector<double>& d, std::size_t n, double perplexity) {
  std::vector<double> p(n * n, 0.0);
  const double target = std::log(perplexity);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &d[i * n];
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, row[j]);
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double* out = &p[i * n];
    for (int it = 0; it < 200; ++it) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          out[j] = 0.0;
          continue;
        }
        // Shifting by the nearest distance keeps at least one term at 1.
        const double w = std::exp(-beta * (row[j] - dmin));
        out[j] = w;
        sum += w;
        weighted += w * (row[j] - dmin);
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
      const double gap = entropy - target;
      if (std::abs(gap) < 1e-5) break;
      if (gap > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
  }
  return p;
}

}  // namespace

std::vector<double> tsne_embed(std::span<const double> features, std::size_t n, std::size_t dim,
                               const TsneOptions& o) {
  if (features.size() != n * dim) throw std::invalid_argument("tsne features size does not match n x dim");
  if (!(o.perplexity > 0.0)) throw std::invalid_argument("tsne perplexity must be positive");
  if (static_cast<double>(n) <= 3.0 * o.perplexity)
    throw std::invalid_argument("tsne needs more than 3 x perplexity points (" + std::to_string(n) +
                                " given, perplexity " + std::to_string(o.perplexity) + ")");
  if (o.iterations < 1) throw std::invalid_argument("tsne iterations must be positive");
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("tsne features must be finite");
  bool identical = true;
  for (std::size_t i = 1; i < n && identical; ++i)
    for (std::size_t k = 0; k < dim; ++k)
      if (features[i * dim + k] != features[k]) {
        identical = false;
        break;
      }
  if (identical)
    throw std::invalid_argument("tsne features are all identical; add a small jitter before embedding");

  const auto d = squared_distances(features, n, dim);
  auto p = conditional_affinities(d, n, o.perplexity);
  const double norm = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max((p[i * n + j] + p[j * n + i]) / norm, 1e-12);
      p[i * n + j] = p[j * n + i] = v;
    }

  Rng rng(derive_seed(o.seed, "tsne"));
  std::normal_distribution<double> normal(0.0, 1e-4);
  std::vector<double> y(n * 2), update(n * 2, 0.0), gains(n * 2, 1.0), grad(n * 2);
  for (double& v : y) v = normal(rng);

  const double rate =
      o.learning_rate > 0.0 ? o.learning_rate : std::max(static_cast<double>(n) / o.exaggeration / 4.0, 50.0);
  std::vector<double> num(n * n, 0.0);
  for (int it = 0; it < o.iterations; ++it) {
    const bool early = it < o.exaggeration_iterations;
    const double exaggeration = early ? o.exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;

    double zsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = q;
        zsum += 2.0 * q;
      }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = num[i * n + j];
        const double m = (exaggeration * p[i * n + j] - std::max(q / zsum, 1e-12)) * q;
        gx += m * (y[2 * i] - y[2 * j]);
        gy += m * (y[2 * i + 1] - y[2 * j + 1]);
      }
      grad[2 * i] = 4.0 * gx;
      grad[2 * i + 1] = 4.0 * gy;
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
      update[k] = momentum * update[k] - rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }
  return y;
}

double silhouette_score(std::span<const double> points, std::size_t n, std::size_t dim,
                        std::span<const int> labels) {
  if (points.size() != n * dim || labels.size() != n)
    throw std::invalid_argument("silhouette inputs have inconsistent sizes");
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw std::invalid_argument("silhouette needs at least two clusters");

  const auto d2 = squared_distances(points, n, dim);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] == 1) continue;
    std::map<int, double> sums;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sums[labels[j]] += std::sqrt(d2[i * n + j]);
    const double a = sums[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, s] : sums)
      if (label != labels[i]) b = std::min(b, s / static_cast<double>(sizes[label]));
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace windfd::eval
