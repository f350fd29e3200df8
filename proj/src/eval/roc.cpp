#include "windfd/eval/roc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <limits>
#include <memory>
#include <stdexcept>

namespace windfd::eval {

BinaryRoc binary_roc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw std::invalid_argument("scores and flags differ in length");
  std::uint64_t P = 0;
  for (bool p : positive) P += p ? 1 : 0;
  const std::uint64_t N = positive.size() - P;
  BinaryRoc roc;
  if (P == 0 || N == 0) return roc;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0, fp = 0, area2 = 0;  // area2 = 2 * P * N * AUC
  std::size_t k = 0;
  while (k < order.size()) {
    const double thr = scores[order[k]];
    std::uint64_t dtp = 0, dfp = 0;
    for (; k < order.size() && scores[order[k]] == thr; ++k) (positive[order[k]] ? dtp : dfp) += 1;
    area2 += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(N),
                          static_cast<double>(tp) / static_cast<double>(P), thr});
  }
  roc.auc = static_cast<double>(area2) / static_cast<double>(2 * P * N);
  return roc;
}

RocResult roc_auc(std::span<const int> labels, std::span<const double> probs, int n_classes) {
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  if (probs.size() != labels.size() * static_cast<std::size_t>(n_classes))
    throw std::invalid_argument("probability matrix does not match the label count");
  RocResult r;
  std::vector<double> scores(labels.size());
  auto flags = std::make_unique<bool[]>(labels.size());
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      scores[k] = probs[k * static_cast<std::size_t>(n_classes) + static_cast<std::size_t>(c)];
      flags[k] = labels[k] == c;
    }
    r.per_class.push_back(binary_roc(scores, std::span<const bool>(flags.get(), labels.size())));
    if (r.per_class.back().auc) {
      sum += *r.per_class.back().auc;
      ++defined;
    }
  }
  if (defined > 0) r.macro_auc = sum / defined;
  return r;
}

nlohmann::json RocResult::to_json(bool with_points) const {
  nlohmann::json j;
  j["per_class_auc"] = nlohmann::json::array();
  for (const auto& c : per_class) j["per_class_auc"].push_back(c.auc ? nlohmann::json(*c.auc) : nlohmann::json(nullptr));
  j["macro_auc"] = macro_auc ? nlohmann::json(*macro_auc) : nlohmann::json(nullptr);
  if (with_points) {
    j["curves"] = nlohmann::json::array();
    for (const auto& c : per_class) {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& p : c.points)
        pts.push_back({p.fpr, p.tpr, std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json(nullptr)});
      j["curves"].push_back(pts);
    }
  }
  return j;
}

RocResult RocResult::from_json(const nlohmann::json& j) {
  RocResult r;
  const auto& aucs = j.at("per_class_auc");
  r.per_class.resize(aucs.size());
  for (std::size_t c = 0; c < aucs.size(); ++c)
    if (!aucs[c].is_null()) r.per_class[c].auc = aucs[c].get<double>();
  if (!j.at("macro_auc").is_null()) r.macro_auc = j["macro_auc"].get<double>();
  if (j.contains("curves")) {
    const auto& curves = j["curves"];
    for (std::size_t c = 0; c < curves.size() && c < r.per_class.size(); ++c)
      for (const auto& p : curves[c])
        r.per_class[c].points.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                         p.at(2).is_null() ? std::numeric_limits<double>::infinity()
                                                           : p.at(2).get<double>()});
  }
  return r;
}

}  // namespace windfd::eval
