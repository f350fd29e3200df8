#include "windfd/eval/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "windfd/common/errors.hpp"

namespace windfd::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(int c) { return kPalette[static_cast<std::size_t>(c) % kPalette.size()]; }

std::string fmt(double v, int digits = 4) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_open(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

struct Row {
  std::string model;
  bool uq;
  std::array<double, 6> values;  // accuracy, precision, recall, F, macro AUC, run accuracy
  std::string folds;
};

Row row_of(const EvalReport& r) {
  std::size_t ok = 0;
  for (const auto& f : r.folds) ok += f.ok ? 1 : 0;
  return {r.model,
          r.uq,
          {r.mean.accuracy, r.mean.precision, r.mean.recall, r.mean.f_score,
           r.roc.macro_auc ? *r.roc.macro_auc : std::nan(""), r.run_accuracy},
          std::to_string(ok) + "/" + std::to_string(r.folds.size())};
}

}  // namespace

std::vector<std::string> class_labels(int n_classes) {
  std::vector<std::string> out;
  for (int c = 0; c < n_classes; ++c) out.push_back(c == 0 ? "H" : "F" + std::to_string(c));
  return out;
}

std::string report_slug(const EvalReport& r) { return r.model + (r.uq ? "-uq" : ""); }

std::string metrics_table_csv(const std::vector<EvalReport>& reports) {
  std::string s = "model,uq,accuracy,precision,recall,f_score,macro_auc,run_accuracy,folds_ok\n";
  for (const auto& r : reports) {
    const Row row = row_of(r);
    s += row.model + "," + (row.uq ? "on" : "off");
    for (double v : row.values) s += "," + fmt(v, 6);
    s += "," + row.folds + "\n";
  }
  return s;
}

std::string metrics_table_markdown(const std::vector<EvalReport>& reports) {
  std::string s =
      "| Model | UQ | Accuracy | Precision | Recall | F-score | Macro AUC | Run accuracy | Folds |\n"
      "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    const Row row = row_of(r);
    s += "| " + row.model + " | " + (row.uq ? "on" : "off");
    for (double v : row.values) s += " | " + (std::isfinite(v) ? fmt(v) : std::string("n/a"));
    s += " | " + row.folds + " |\n";
  }
  return s;
}

std::string confusion_svg(const ConfusionMatrix& cm, const std::string& title) {
  const int n = cm.n_classes;
  const int cell = 48, left = 70, top = 60;
  const int w = left + n * cell + 20, h = top + n * cell + 50;
  const auto names = class_labels(n);
  std::string s = svg_open(w, h);
  s += "<text x=\"" + std::to_string(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  for (int t = 0; t < n; ++t) {
    std::size_t row_total = 0;
    for (int p = 0; p < n; ++p) row_total += cm.at(t, p);
    for (int p = 0; p < n; ++p) {
      const std::size_t v = cm.at(t, p);
      const double frac = row_total ? static_cast<double>(v) / static_cast<double>(row_total) : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - 0.85 * frac)));
      const int x = left + p * cell, y = top + t * cell;
      char fill[8];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
           std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill +
           "\" stroke=\"#888\"/>\n";
      s += "<text class=\"cell\" data-row=\"" + std::to_string(t) + "\" data-col=\"" + std::to_string(p) +
           "\" x=\"" + std::to_string(x + cell / 2) + "\" y=\"" + std::to_string(y + cell / 2 + 5) +
           "\" text-anchor=\"middle\" font-size=\"13\" fill=\"" + (frac > 0.6 ? "white" : "black") + "\">" +
           std::to_string(v) + "</text>\n";
    }
    s += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" + std::to_string(top + t * cell + cell / 2 + 5) +
         "\" text-anchor=\"end\" font-size=\"13\">" + names[static_cast<std::size_t>(t)] + "</text>\n";
  }
  for (int p = 0; p < n; ++p)
    s += "<text x=\"" + std::to_string(left + p * cell + cell / 2) + "\" y=\"" + std::to_string(top - 8) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + names[static_cast<std::size_t>(p)] + "</text>\n";
  s += "<text x=\"" + std::to_string(left + n * cell / 2) + "\" y=\"" + std::to_string(h - 15) +
       "\" text-anchor=\"middle\" font-size=\"13\">predicted</text>\n";
  s += "<text x=\"18\" y=\"" + std::to_string(top + n * cell / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
       "transform=\"rotate(-90 18 " + std::to_string(top + n * cell / 2) + ")\">true</text>\n";
  s += "</svg>\n";
  return s;
}

std::string roc_svg(const RocResult& roc, const std::string& title) {
  const int size = 360, left = 60, top = 40, legend = 170;
  const int w = left + size + legend, h = top + size + 50;
  auto px = [&](double fpr) { return fmt(left + fpr * size, 2); };
  auto py = [&](double tpr) { return fmt(top + (1.0 - tpr) * size, 2); };
  const auto names = class_labels(static_cast<int>(roc.per_class.size()));
  std::string s = svg_open(w, h);
  s += "<text x=\"" + std::to_string(left + size / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  s += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) + "\" width=\"" +
       std::to_string(size) + "\" height=\"" + std::to_string(size) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + px(0) + "\" y1=\"" + py(0) + "\" x2=\"" + px(1) + "\" y2=\"" + py(1) +
       "\" stroke=\"#aaa\" stroke-dasharray=\"4 4\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = k / 4.0;
    s += "<text x=\"" + px(v) + "\" y=\"" + std::to_string(top + size + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + fmt(v, 2) + "</text>\n";
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + py(v) +
         "\" text-anchor=\"end\" font-size=\"11\">" + fmt(v, 2) + "</text>\n";
  }
  s += "<text x=\"" + std::to_string(left + size / 2) + "\" y=\"" + std::to_string(h - 10) +
       "\" text-anchor=\"middle\" font-size=\"13\">false positive rate</text>\n";
  s += "<text x=\"16\" y=\"" + std::to_string(top + size / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
       "transform=\"rotate(-90 16 " + std::to_string(top + size / 2) + ")\">true positive rate</text>\n";
  int line = 0;
  for (std::size_t c = 0; c < roc.per_class.size(); ++c) {
    const auto& curve = roc.per_class[c];
    if (!curve.auc) continue;
    std::string pts;
    for (const auto& p : curve.points) pts += px(p.fpr) + "," + py(p.tpr) + " ";
    s += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(color(static_cast<int>(c))) +
         "\" points=\"" + pts + "\"/>\n";
    const int ly = top + 12 + 18 * line++;
    s += "<line x1=\"" + std::to_string(left + size + 12) + "\" y1=\"" + std::to_string(ly - 4) + "\" x2=\"" +
         std::to_string(left + size + 32) + "\" y2=\"" + std::to_string(ly - 4) + "\" stroke=\"" +
         color(static_cast<int>(c)) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + std::to_string(left + size + 38) + "\" y=\"" + std::to_string(ly) +
         "\" font-size=\"12\">" + names[c] + " AUC " + fmt(*curve.auc, 3) + "</text>\n";
  }
  if (roc.macro_auc)
    s += "<text x=\"" + std::to_string(left + size + 12) + "\" y=\"" + std::to_string(top + 12 + 18 * line + 6) +
         "\" font-size=\"12\">macro AUC " + fmt(*roc.macro_auc, 3) + "</text>\n";
  s += "</svg>\n";
  return s;
}

std::string scatter_svg(std::span<const double> points, std::span<const int> labels, const std::string& title,
                        int n_classes) {
  if (points.size() != labels.size() * 2) throw std::invalid_argument("scatter needs n x 2 points for n labels");
  const int size = 420, left = 30, top = 40, legend = 90;
  const int w = left + size + legend, h = top + size + 30;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!labels.empty()) {
    x0 = x1 = points[0];
    y0 = y1 = points[1];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      x0 = std::min(x0, points[2 * i]);
      x1 = std::max(x1, points[2 * i]);
      y0 = std::min(y0, points[2 * i + 1]);
      y1 = std::max(y1, points[2 * i + 1]);
    }
  }
  const double sx = x1 > x0 ? size / (x1 - x0) : 1.0, sy = y1 > y0 ? size / (y1 - y0) : 1.0;
  std::string s = svg_open(w, h);
  s += "<text x=\"" + std::to_string(left + size / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    s += "<circle cx=\"" + fmt(left + (points[2 * i] - x0) * sx, 2) + "\" cy=\"" +
         fmt(top + (y1 - points[2 * i + 1]) * sy, 2) + "\" r=\"2.5\" fill=\"" + color(labels[i]) +
         "\" fill-opacity=\"0.7\" data-class=\"" + std::to_string(labels[i]) + "\"/>\n";
  const auto names = class_labels(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const int ly = top + 12 + 18 * c;
    s += "<circle cx=\"" + std::to_string(left + size + 20) + "\" cy=\"" + std::to_string(ly - 4) +
         "\" r=\"5\" fill=\"" + color(c) + "\"/>\n";
    s += "<text x=\"" + std::to_string(left + size + 30) + "\" y=\"" + std::to_string(ly) + "\" font-size=\"12\">" +
         names[static_cast<std::size_t>(c)] + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

void append_json_line(const fs::path& path, const json& entry) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError(path.string(), "cannot open for appending");
  out << entry.dump() << '\n';
  if (!out) throw IoError(path.string(), "append failed");
}

std::vector<fs::path> render_reports(const std::vector<EvalReport>& reports, const fs::path& dir) {
  if (reports.empty()) throw std::invalid_argument("no reports to render");
  std::vector<fs::path> written;
  json all{{"reports", json::array()}};
  for (const auto& r : reports) all["reports"].push_back(r.to_json());
  auto put = [&](const fs::path& p, const std::string& text) {
    write_text(p, text);
    written.push_back(p);
  };
  put(dir / "metrics.json", all.dump(1) + "\n");
  put(dir / "metrics.csv", metrics_table_csv(reports));
  put(dir / "metrics.md", metrics_table_markdown(reports));
  for (const auto& r : reports) {
    const std::string slug = report_slug(r);
    put(dir / "figures" / ("cm-" + slug + ".svg"), confusion_svg(r.confusion, r.label() + " confusion matrix"));
    put(dir / "figures" / ("roc-" + slug + ".svg"), roc_svg(r.roc, r.label() + " ROC"));
  }
  return written;
}

std::vector<EvalReport> read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open metrics file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string(), std::string("malformed metrics file (") + e.what() + ")");
  }
  std::vector<EvalReport> out;
  for (const auto& r : j.at("reports")) out.push_back(EvalReport::from_json(r));
  return out;
}

void write_predictions_csv(const fs::path& path, const Predictions& pred, const dataset::WindowSet& set) {
  std::ostringstream s;
  s << "window,run,fold,label,predicted,entropy";
  for (int c = 0; c < pred.n_classes; ++c) s << ",p" << c;
  s << '\n';
  char buf[32];
  for (std::size_t k = 0; k < pred.size(); ++k) {
    s << pred.window[k] << ',' << set.group_id(pred.window[k]) << ',' << pred.fold[k] << ',' << pred.label[k] << ','
      << pred.predicted[k];
    std::snprintf(buf, sizeof buf, ",%.9g", pred.entropy[k]);
    s << buf;
    for (int c = 0; c < pred.n_classes; ++c) {
      std::snprintf(buf, sizeof buf, ",%.9g", pred.probs[k * static_cast<std::size_t>(pred.n_classes) + c]);
      s << buf;
    }
    s << '\n';
  }
  write_text(path, s.str());
}

}  // namespace windfd::eval
