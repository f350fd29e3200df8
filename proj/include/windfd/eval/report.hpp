#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/dataset/windows.hpp"
#include "windfd/eval/cross_validation.hpp"

namespace windfd::eval {

/// Short class labels used on figure axes: "H", "F1" .. "F7".
std::vector<std::string> class_labels(int n_classes = 8);

/// File-name stem of a report, e.g. "casu2net-uq".
std::string report_slug(const EvalReport& report);

/// One row per report: model, UQ flag, accuracy, precision, recall,
/// F-score, macro AUC, run-level accuracy and successful folds.
std::string metrics_table_csv(const std::vector<EvalReport>& reports);
std::string metrics_table_markdown(const std::vector<EvalReport>& reports);

/// Heat map with rows = true class. Every cell carries a text element
/// `<text class="cell" data-row="r" data-col="c">count</text>`.
std::string confusion_svg(const ConfusionMatrix& cm, const std::string& title);
/// One-vs-rest curves with per-class AUC in the legend.
std::string roc_svg(const RocResult& roc, const std::string& title);
/// 2-D scatter (n x 2 row-major) colored by class.
std::string scatter_svg(std::span<const double> points, std::span<const int> labels, const std::string& title,
                        int n_classes = 8);

/// Writes metrics.json (all reports), metrics.csv, metrics.md and, per
/// report, figures/roc-<slug>.svg and figures/cm-<slug>.svg under `dir`.
/// Returns the written paths. Throws std::invalid_argument for no reports
/// and IoError with the path on a write failure.
std::vector<std::filesystem::path> render_reports(const std::vector<EvalReport>& reports,
                                                  const std::filesystem::path& dir);

/// Reads a metrics.json written by render_reports.
std::vector<EvalReport> read_metrics(const std::filesystem::path& path);

/// Writes one CSV row per prediction: window, run, fold, label, predicted,
/// entropy and the class probabilities.
void write_predictions_csv(const std::filesystem::path& path, const Predictions& pred,
                           const dataset::WindowSet& set);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
/// Appends one compact JSON line. Throws IoError.
void append_json_line(const std::filesystem::path& path, const nlohmann::json& entry);

}  // namespace windfd::eval
