#include "windfd/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace windfd::eval {

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (int c = 0; c < n_classes; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.n_classes != n_classes) throw std::invalid_argument("confusion matrices differ in class count");
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  return *this;
}

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < n_classes; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < n_classes; ++p) row.push_back(at(t, p));
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix ConfusionMatrix::from_json(const nlohmann::json& j) {
  ConfusionMatrix cm(static_cast<int>(j.size()));
  for (int t = 0; t < cm.n_classes; ++t)
    for (int p = 0; p < cm.n_classes; ++p) cm.at(t, p) = j.at(t).at(p).get<std::size_t>();
  return cm;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, int n_classes) {
  if (truth.size() != pred.size()) throw std::invalid_argument("label vectors differ in length");
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  ConfusionMatrix cm(n_classes);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] < 0 || truth[k] >= n_classes || pred[k] < 0 || pred[k] >= n_classes)
      throw std::invalid_argument("label out of range at index " + std::to_string(k));
    ++cm.at(truth[k], pred[k]);
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void fill_ratios(Metrics& m) {
  m.accuracy = ratio(m.tp + m.tn, m.tp + m.tn + m.fp + m.fn);
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f_score = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
}

}  // namespace

Metrics class_metrics(const ConfusionMatrix& cm, int cls) {
  if (cls < 0 || cls >= cm.n_classes) throw std::invalid_argument("class out of range");
  Metrics m;
  const std::size_t n = cm.total();
  m.tp = cm.at(cls, cls);
  for (int k = 0; k < cm.n_classes; ++k) {
    if (k == cls) continue;
    m.fp += cm.at(k, cls);
    m.fn += cm.at(cls, k);
  }
  m.tn = n - m.tp - m.fp - m.fn;
  fill_ratios(m);
  return m;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.n_classes == 2) return class_metrics(cm, 1);
  Metrics m;
  for (int c = 0; c < cm.n_classes; ++c) {
    const Metrics k = class_metrics(cm, c);
    m.tp += k.tp;
    m.tn += k.tn;
    m.fp += k.fp;
    m.fn += k.fn;
  }
  fill_ratios(m);
  m.accuracy = ratio(cm.trace(), cm.total());
  return m;
}

void check_micro_identity(const ConfusionMatrix& cm, const Metrics& m) {
  if (cm.n_classes == 2) return;
  const double acc = ratio(cm.trace(), cm.total());
  if (m.accuracy != acc || m.precision != acc || m.recall != acc || m.f_score != acc)
    throw std::logic_error("micro precision/recall/F do not equal accuracy");
}

nlohmann::json Metrics::to_json() const {
  return {{"tp", tp},       {"tn", tn},         {"fp", fp},         {"fn", fn},
          {"accuracy", accuracy}, {"precision", precision}, {"recall", recall}, {"f_score", f_score}};
}

Metrics Metrics::from_json(const nlohmann::json& j) {
  Metrics m;
  m.tp = j.at("tp").get<std::size_t>();
  m.tn = j.at("tn").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f_score = j.at("f_score").get<double>();
  return m;
}

}  // namespace windfd::eval
