#include "windfd/eval/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "windfd/common/logging.hpp"
#include "windfd/common/random.hpp"
#include "windfd/models/checkpoint.hpp"
#include "windfd/models/network.hpp"

namespace windfd::eval {

using nlohmann::json;

void Predictions::append(std::size_t window_index, int fold_index, int truth, std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(n_classes))
    throw std::invalid_argument("prediction row has " + std::to_string(p.size()) + " classes, expected " +
                                std::to_string(n_classes));
  window.push_back(window_index);
  fold.push_back(fold_index);
  label.push_back(truth);
  predicted.push_back(uq::argmax(p));
  probs.insert(probs.end(), p.begin(), p.end());
  entropy.push_back(uq::entropy(p));
}

json Predictions::to_json() const {
  return {{"model", model}, {"uq", uq},         {"n_classes", n_classes}, {"window", window},
          {"fold", fold},   {"label", label},   {"predicted", predicted}, {"probs", probs},
          {"entropy", entropy}};
}

Predictions Predictions::from_json(const json& j) {
  Predictions p;
  p.model = j.at("model").get<std::string>();
  p.uq = j.at("uq").get<bool>();
  p.n_classes = j.at("n_classes").get<int>();
  p.window = j.at("window").get<std::vector<std::size_t>>();
  p.fold = j.at("fold").get<std::vector<int>>();
  p.label = j.at("label").get<std::vector<int>>();
  p.predicted = j.at("predicted").get<std::vector<int>>();
  p.probs = j.at("probs").get<std::vector<double>>();
  p.entropy = j.at("entropy").get<std::vector<double>>();
  const std::size_t n = p.label.size();
  if (p.window.size() != n || p.fold.size() != n || p.predicted.size() != n || p.entropy.size() != n ||
      p.probs.size() != n * static_cast<std::size_t>(p.n_classes))
    throw std::invalid_argument("predictions file has inconsistent column lengths");
  return p;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json fold_json(const FoldResult& f) {
  json j{{"fold", f.fold}, {"status", f.ok ? "ok" : "failed"}};
  if (!f.ok) {
    j["error"] = f.error;
    return j;
  }
  j["n_test"] = f.n_test;
  j["metrics"] = f.metrics.to_json();
  j["confusion"] = f.confusion.to_json();
  j["macro_auc"] = opt(f.macro_auc);
  j["n_runs"] = f.n_runs;
  j["run_accuracy"] = f.run_accuracy;
  return j;
}

FoldResult fold_from_json(const json& j) {
  FoldResult f;
  f.fold = j.at("fold").get<int>();
  f.ok = j.at("status").get<std::string>() == "ok";
  if (!f.ok) {
    f.error = j.value("error", "");
    return f;
  }
  f.n_test = j.at("n_test").get<std::size_t>();
  f.metrics = Metrics::from_json(j.at("metrics"));
  f.confusion = ConfusionMatrix::from_json(j.at("confusion"));
  if (!j.at("macro_auc").is_null()) f.macro_auc = j["macro_auc"].get<double>();
  f.n_runs = j.at("n_runs").get<std::size_t>();
  f.run_accuracy = j.at("run_accuracy").get<double>();
  return f;
}

}  // namespace

bool EvalReport::complete() const {
  return std::all_of(folds.begin(), folds.end(), [](const FoldResult& f) { return f.ok; });
}

std::string EvalReport::label() const { return model + (uq ? " (UQ)" : ""); }

json EvalReport::to_json() const {
  json j{{"model", model},         {"uq", uq},           {"mc_passes", mc_passes},
         {"n_classes", n_classes}, {"k_folds", k_folds}, {"config_hash", config_hash}};
  j["folds"] = json::array();
  for (const auto& f : folds) j["folds"].push_back(fold_json(f));
  j["aggregate"] = {{"mean", mean.to_json()},
                    {"pooled", pooled.to_json()},
                    {"confusion", confusion.to_json()},
                    {"roc", roc.to_json(true)},
                    {"n_runs", n_runs},
                    {"run_accuracy", run_accuracy}};
  j["uncertainty"] = uncertainty.to_json();
  j["runtime"] = runtime;
  return j;
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.model = j.at("model").get<std::string>();
  r.uq = j.at("uq").get<bool>();
  r.mc_passes = j.at("mc_passes").get<int>();
  r.n_classes = j.at("n_classes").get<int>();
  r.k_folds = j.at("k_folds").get<int>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& f : j.at("folds")) r.folds.push_back(fold_from_json(f));
  const auto& a = j.at("aggregate");
  r.mean = Metrics::from_json(a.at("mean"));
  r.pooled = Metrics::from_json(a.at("pooled"));
  r.confusion = ConfusionMatrix::from_json(a.at("confusion"));
  r.roc = RocResult::from_json(a.at("roc"));
  r.n_runs = a.at("n_runs").get<std::size_t>();
  r.run_accuracy = a.at("run_accuracy").get<double>();
  r.uncertainty = uq::UncertaintySummary::from_json(j.at("uncertainty"));
  r.runtime = j.value("runtime", json::object());
  return r;
}

std::pair<std::size_t, std::size_t> run_votes(const Predictions& pred, const dataset::WindowSet& set,
                                              std::optional<int> fold) {
  std::map<int, std::vector<std::size_t>> votes;  // run -> per-class count
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (fold && pred.fold[k] != *fold) continue;
    const int run = set.groups.at(pred.window[k]);
    auto& v = votes[run];
    v.resize(static_cast<std::size_t>(pred.n_classes), 0);
    ++v[static_cast<std::size_t>(pred.predicted[k])];
  }
  std::size_t correct = 0;
  for (const auto& [run, v] : votes) {
    const auto winner = std::max_element(v.begin(), v.end()) - v.begin();
    if (winner == set.run_labels.at(static_cast<std::size_t>(run))) ++correct;
  }
  return {votes.size(), correct};
}

EvalReport score_predictions(const Predictions& pred, const dataset::WindowSet& set, int k_folds,
                             const std::vector<FoldFailure>& failures, const std::string& config_hash) {
  const int C = pred.n_classes;
  EvalReport r;
  r.model = pred.model;
  r.uq = pred.uq;
  r.n_classes = C;
  r.k_folds = k_folds;
  r.config_hash = config_hash;

  std::map<int, std::string> failed;
  for (const auto& f : failures) failed[f.fold] = f.error;
  std::map<int, std::vector<std::size_t>> rows_of;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (failed.count(pred.fold[k]))
      throw std::invalid_argument("predictions contain rows of failed fold " + std::to_string(pred.fold[k]));
    rows_of[pred.fold[k]].push_back(k);
  }
  for (const auto& [f, e] : failed) rows_of.try_emplace(f);

  double acc = 0, prec = 0, rec = 0, fs = 0;
  int ok = 0;
  for (const auto& [f, rows] : rows_of) {
    FoldResult fr;
    fr.fold = f;
    if (auto it = failed.find(f); it != failed.end()) {
      fr.ok = false;
      fr.error = it->second;
      r.folds.push_back(fr);
      continue;
    }
    std::vector<int> truth, guess;
    std::vector<double> probs;
    for (auto k : rows) {
      truth.push_back(pred.label[k]);
      guess.push_back(pred.predicted[k]);
      probs.insert(probs.end(), pred.probs.begin() + static_cast<std::ptrdiff_t>(k * C),
                   pred.probs.begin() + static_cast<std::ptrdiff_t>((k + 1) * C));
    }
    fr.n_test = rows.size();
    fr.confusion = confusion(truth, guess, C);
    fr.metrics = compute_metrics(fr.confusion);
    check_micro_identity(fr.confusion, fr.metrics);
    fr.macro_auc = roc_auc(truth, probs, C).macro_auc;
    const auto [runs, right] = run_votes(pred, set, f);
    fr.n_runs = runs;
    fr.run_accuracy = runs ? static_cast<double>(right) / static_cast<double>(runs) : 0.0;
    acc += fr.metrics.accuracy;
    prec += fr.metrics.precision;
    rec += fr.metrics.recall;
    fs += fr.metrics.f_score;
    ++ok;
    r.folds.push_back(fr);
  }

  r.confusion = confusion(pred.label, pred.predicted, C);
  r.pooled = compute_metrics(r.confusion);
  check_micro_identity(r.confusion, r.pooled);
  r.mean = r.pooled;
  if (ok > 0) {
    r.mean.accuracy = acc / ok;
    r.mean.precision = prec / ok;
    r.mean.recall = rec / ok;
    r.mean.f_score = fs / ok;
  }
  r.roc = roc_auc(pred.label, pred.probs, C);
  const auto [runs, right] = run_votes(pred, set);
  r.n_runs = runs;
  r.run_accuracy = runs ? static_cast<double>(right) / static_cast<double>(runs) : 0.0;

  std::vector<uq::PredictionDistribution> dists(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    dists[k].predicted_class = pred.predicted[k];
    dists[k].entropy = pred.entropy[k];
    dists[k].mean_probs.assign(pred.probs.begin() + static_cast<std::ptrdiff_t>(k * C),
                               pred.probs.begin() + static_cast<std::ptrdiff_t>((k + 1) * C));
  }
  r.uncertainty = uq::uncertainty_report(dists, pred.label);
  return r;
}

std::uint64_t fold_init_seed(std::uint64_t seed, int fold) {
  return derive_seed(seed, "fold-init", static_cast<std::uint64_t>(fold));
}
std::uint64_t fold_train_seed(std::uint64_t seed, int fold) {
  return derive_seed(seed, "fold-train", static_cast<std::uint64_t>(fold));
}
std::uint64_t fold_mc_seed(std::uint64_t seed, int fold) {
  return derive_seed(seed, "fold-mc", static_cast<std::uint64_t>(fold));
}

std::filesystem::path fold_checkpoint_path(const std::filesystem::path& dir, const models::ModelSpec& spec,
                                           int fold) {
  return dir / (std::string(models::architecture_name(spec.architecture)) + "-fold" + std::to_string(fold) +
                ".ckpt");
}

namespace {

std::vector<int> selected_folds(const std::vector<int>& requested, int k) {
  std::vector<int> folds = requested;
  if (folds.empty())
    for (int f = 0; f < k; ++f) folds.push_back(f);
  for (int f : folds)
    if (f < 0 || f >= k) throw std::invalid_argument("fold " + std::to_string(f) + " is outside the plan");
  return folds;
}

std::vector<int> labels_at(const dataset::WindowSet& set, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(set.labels[i]);
  return out;
}

std::optional<models::Checkpoint> reusable_checkpoint(const std::filesystem::path& path,
                                                      const models::ModelSpec& spec, const CvOptions& o,
                                                      int fold, const dataset::NormalizationStats& stats) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto ckpt = models::load_checkpoint(path, spec.hash());
    const auto& m = ckpt.metadata;
    if (m.config_hash == o.config_hash && m.fold == fold && m.epochs == o.train.epochs &&
        m.seed == fold_train_seed(o.seed, fold) && ckpt.init_seed == fold_init_seed(o.seed, fold) &&
        ckpt.normalization == stats)
      return ckpt;
    log::info("checkpoint " + path.string() + " was produced by a different configuration; retraining");
  } catch (const std::exception& e) {
    log::warn("ignoring unusable checkpoint " + path.string() + ": " + e.what());
  }
  return std::nullopt;
}

}  // namespace

CvOutput run_cv(const models::ModelSpec& spec, const dataset::StoredDataset& data, const CvOptions& o) {
  spec.validate();
  const auto& set = data.set;
  if (data.fold_stats.size() != static_cast<std::size_t>(data.plan.k))
    throw std::invalid_argument("dataset carries " + std::to_string(data.fold_stats.size()) +
                                " normalization sets for " + std::to_string(data.plan.k) + " folds");
  if (static_cast<std::size_t>(spec.input.sample_values()) != set.window_values())
    throw std::invalid_argument("model input holds " + std::to_string(spec.input.sample_values()) +
                                " values but windows hold " + std::to_string(set.window_values()));
  if (o.uq && o.mc_passes < 1) throw std::invalid_argument("mc_passes must be at least 1");
  const std::string name(models::architecture_name(spec.architecture));
  auto say = [&](const std::string& m) {
    log::info(m);
    if (o.progress) o.progress(m);
  };

  CvOutput out;
  out.plain.model = out.uq.model = name;
  out.plain.n_classes = out.uq.n_classes = spec.n_classes;
  out.uq.uq = true;
  if (o.checkpoint_dir) std::filesystem::create_directories(*o.checkpoint_dir);

  for (int f : selected_folds(o.folds, data.plan.k)) {
    try {
      const auto& stats = data.fold_stats[static_cast<std::size_t>(f)];
      const auto test_idx = data.plan.test_indices(set, f);
      const auto test_x = dataset::gather_normalized(set, test_idx, stats);
      const auto test_y = labels_at(set, test_idx);
      const models::Samples test{test_x, test_y};

      std::optional<models::Network> net;
      models::TrainingMetadata meta;
      std::optional<std::filesystem::path> ckpt_path;
      if (o.checkpoint_dir) ckpt_path = fold_checkpoint_path(*o.checkpoint_dir, spec, f);
      if (ckpt_path) {
        if (auto ckpt = reusable_checkpoint(*ckpt_path, spec, o, f, stats)) {
          net.emplace(models::restore(*ckpt));
          meta = ckpt->metadata;
          say(name + " fold " + std::to_string(f) + ": reusing " + ckpt_path->filename().string());
        }
      }
      if (!net) {
        const auto train_idx = data.plan.train_indices(set, f);
        const auto train_x = dataset::gather_normalized(set, train_idx, stats);
        const auto train_y = labels_at(set, train_idx);
        net.emplace(spec, fold_init_seed(o.seed, f));
        auto cfg = o.train;
        cfg.seed = fold_train_seed(o.seed, f);
        say(name + " fold " + std::to_string(f) + ": training on " + std::to_string(train_idx.size()) +
            " windows");
        const auto history = models::train(*net, {train_x, train_y}, cfg, &test,
                                           [&](const models::EpochRecord& e) {
                                             log::debug(name + " fold " + std::to_string(f) + " epoch " +
                                                        std::to_string(e.epoch) + " loss " +
                                                        std::to_string(e.train_loss));
                                             return true;
                                           });
        meta.epochs = cfg.epochs;
        meta.batch_size = cfg.batch_size;
        meta.learning_rate = cfg.adam.learning_rate;
        meta.seed = cfg.seed;
        meta.fold = f;
        meta.config_hash = o.config_hash;
        for (const auto& e : history) {
          meta.train_loss.push_back(e.train_loss);
          meta.val_loss.push_back(e.val_loss);
        }
        if (ckpt_path)
          models::save_checkpoint(*ckpt_path, models::capture(*net, fold_init_seed(o.seed, f), meta, stats));
      }
      out.training.push_back(meta);

      if (o.plain) {
        const auto dists = uq::deterministic_predict(*net, test_x, o.mc_batch);
        for (std::size_t k = 0; k < dists.size(); ++k)
          out.plain.append(test_idx[k], f, test_y[k], dists[k].mean_probs);
      }
      if (o.uq) {
        uq::McOptions mc;
        mc.k = o.mc_passes;
        mc.seed = fold_mc_seed(o.seed, f);
        mc.batch_size = o.mc_batch;
        const auto dists = uq::mc_predict(*net, test_x, mc);
        for (std::size_t k = 0; k < dists.size(); ++k)
          out.uq.append(test_idx[k], f, test_y[k], dists[k].mean_probs);
      }
      say(name + " fold " + std::to_string(f) + ": done");
    } catch (const std::exception& e) {
      log::error(name + " fold " + std::to_string(f) + " failed: " + e.what());
      if (o.progress) o.progress(name + " fold " + std::to_string(f) + " failed: " + e.what());
      // Drop any rows the fold appended before failing.
      for (Predictions* p : {&out.plain, &out.uq}) {
        Predictions kept;
        kept.model = p->model;
        kept.uq = p->uq;
        kept.n_classes = p->n_classes;
        for (std::size_t k = 0; k < p->size(); ++k)
          if (p->fold[k] != f)
            kept.append(p->window[k], p->fold[k], p->label[k],
                        std::span<const double>(p->probs).subspan(k * static_cast<std::size_t>(p->n_classes),
                                                                  static_cast<std::size_t>(p->n_classes)));
        *p = std::move(kept);
      }
      out.failures.push_back({f, e.what()});
    }
  }
  return out;
}

BaselineOutput baseline_classifiers(const dataset::WindowSet& set, const dataset::FoldPlan& plan,
                                    const BaselineOptions& o) {
  BaselineOutput out;
  out.tree.model = "decision-tree";
  out.forest.model = "random-forest";
  const std::size_t d = set.window_values();
  for (int f : selected_folds(o.folds, plan.k)) {
    const auto train_idx = plan.train_indices(set, f);
    const auto test_idx = plan.test_indices(set, f);
    std::vector<float> train_x;
    train_x.reserve(train_idx.size() * d);
    for (auto i : train_idx) train_x.insert(train_x.end(), set.window(i), set.window(i) + d);
    const auto train_y = labels_at(set, train_idx);
    const FeatureView xv{train_x, train_idx.size(), d};
    const FeatureView all{set.windows, set.size(), d};

    auto tree_opts = o.tree;
    tree_opts.seed = derive_seed(o.seed, "dt", static_cast<std::uint64_t>(f));
    DecisionTree tree;
    tree.fit(xv, train_y, 8, tree_opts);
    auto forest_opts = o.forest;
    forest_opts.seed = derive_seed(o.seed, "rf", static_cast<std::uint64_t>(f));
    RandomForest forest;
    forest.fit(xv, train_y, 8, forest_opts);

    for (auto i : test_idx) {
      out.tree.append(i, f, set.labels[i], tree.leaf_distribution(all, i));
      out.forest.append(i, f, set.labels[i], forest.predict_proba(all, i));
    }
    log::info("baselines fold " + std::to_string(f) + ": done");
  }
  return out;
}

}  // namespace windfd::eval
