#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace windfd::eval {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Binary ROC of `scores` against `positive` flags, one point per unique
/// score (descending) after the origin. AUC is the trapezoid area, computed
/// from integer counts so tied scores contribute exactly one half. Empty
/// when either class is missing.
struct BinaryRoc {
  std::vector<RocPoint> points;
  std::optional<double> auc;
};

BinaryRoc binary_roc(std::span<const double> scores, std::span<const bool> positive);

/// One-vs-rest ROC for every class from rowwise probabilities (N x C,
/// row-major). A class absent from `labels`, or making up all of them, has
/// no AUC and is left out of the unweighted macro mean.
struct RocResult {
  std::vector<BinaryRoc> per_class;
  std::optional<double> macro_auc;

  nlohmann::json to_json(bool with_points = true) const;
  static RocResult from_json(const nlohmann::json& j);
};

RocResult roc_auc(std::span<const int> labels, std::span<const double> probs, int n_classes);

}  // namespace windfd::eval
