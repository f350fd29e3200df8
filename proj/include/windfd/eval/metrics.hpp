#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace windfd::eval {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<std::size_t> counts;  // n_classes * n_classes, row-major

  explicit ConfusionMatrix(int n = 0) : n_classes(n), counts(static_cast<std::size_t>(n) * n, 0) {}
  std::size_t& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * n_classes + pred]; }
  std::size_t at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * n_classes + pred]; }
  std::size_t total() const;
  std::size_t trace() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

  nlohmann::json to_json() const;
  static ConfusionMatrix from_json(const nlohmann::json& j);
};

/// Throws std::invalid_argument for mismatched lengths or labels outside
/// [0, n_classes).
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, int n_classes);

struct Metrics {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  bool operator==(const Metrics&) const = default;

  nlohmann::json to_json() const;
  static Metrics from_json(const nlohmann::json& j);
};

/// Two classes: counts for positive class 1 and
///   accuracy = (TP + TN) / (TP + TN + FP + FN), precision = TP / (TP + FP),
///   recall = TP / (TP + FN), F = 2 TP / (2 TP + FP + FN).
/// More classes: the counts are pooled over the one-vs-rest decompositions
/// (micro average), so precision = recall = F = trace / total, and accuracy
/// is trace / total. Ratios with a zero denominator are 0.
Metrics compute_metrics(const ConfusionMatrix& cm);

/// One-vs-rest counts and ratios for a single class.
Metrics class_metrics(const ConfusionMatrix& cm, int cls);

/// Throws std::logic_error when the multiclass micro identities
/// precision = recall = F = accuracy = trace / total do not hold.
void check_micro_identity(const ConfusionMatrix& cm, const Metrics& m);

}  // namespace windfd::eval
