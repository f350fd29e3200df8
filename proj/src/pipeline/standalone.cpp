#include "windfd/pipeline/standalone.hpp"

#include <cstdio>
#include <stdexcept>

#include "windfd/common/hashing.hpp"
#include "windfd/common/logging.hpp"
#include "windfd/common/random.hpp"
#include "windfd/dataset/corpus.hpp"
#include "windfd/dataset/folds.hpp"
#include "windfd/eval/report.hpp"
#include "windfd/models/checkpoint.hpp"
#include "windfd/pipeline/stages.hpp"
#include "windfd/turbsim/trace_io.hpp"

namespace windfd::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path simulate_standalone(const SimulateOptions& o) {
  if (o.runs < 1) throw std::invalid_argument("runs must be at least 1");
  const auto kind = turbsim::parse_fault_kind(o.scenario);
  const std::string name(turbsim::fault_name(kind));
  fs::create_directories(o.out);
  const fs::path manifest_path = o.out / "manifest.json";
  turbsim::CorpusManifest manifest;
  if (fs::exists(manifest_path)) manifest = turbsim::read_manifest(manifest_path);
  manifest.sample_rate = o.simulator.sample_rate;
  const std::string hash = to_hex(fnv1a(json{{"seed", o.seed},
                                             {"duration_s", o.duration_s},
                                             {"mean_wind", o.mean_wind},
                                             {"turbulence_intensity", o.turbulence_intensity},
                                             {"kp", o.simulator.controller.kp},
                                             {"ki", o.simulator.controller.ki}}
                                            .dump()));
  if (!manifest.config_hash.empty() && manifest.config_hash != hash)
    log::warn("manifest " + manifest_path.string() + " already holds runs of another configuration");
  manifest.config_hash = hash;
  for (int r = 0; r < o.runs; ++r) {
    char id[64];
    std::snprintf(id, sizeof id, "%s-%03d", name.c_str(), r);
    const std::uint64_t wind_seed = derive_seed(o.seed, "wind:" + name, static_cast<std::uint64_t>(r));
    const auto wind = turbsim::generate_wind(wind_seed, o.duration_s, 1.0 / o.simulator.sample_rate, o.mean_wind,
                                             o.turbulence_intensity);
    auto trace = turbsim::run_simulation(o.simulator, turbsim::FaultScenario::make(kind), wind, o.duration_s, id);
    trace.wind_seed = wind_seed;
    const std::string file = std::string(id) + ".csv";
    turbsim::write_trace(o.out / file, trace, hash);
    std::erase_if(manifest.runs, [&](const turbsim::CorpusEntry& e) { return e.run_id == id; });
    manifest.runs.push_back({id, file, static_cast<int>(kind), wind_seed, o.duration_s});
  }
  turbsim::write_manifest(manifest_path, manifest);
  return manifest_path;
}

void build_dataset_standalone(const BuildDatasetOptions& o) {
  const auto manifest = turbsim::read_manifest(o.manifest);
  dataset::StoredDataset data;
  data.set = dataset::build_corpus(manifest, o.manifest.parent_path(), o.window, o.stride);
  data.plan = dataset::make_folds(data.set, o.folds, o.seed);
  data.fold_stats = dataset::fit_fold_stats(data.set, data.plan);
  data.config_hash = to_hex(fnv1a(json{{"manifest", manifest.config_hash},
                                       {"window", o.window},
                                       {"stride", o.stride},
                                       {"folds", o.folds},
                                       {"seed", o.seed}}
                                      .dump()));
  dataset::save_dataset(o.out, data);
}

fs::path train_standalone(const TrainOptions& o) {
  const auto data = dataset::load_dataset(o.dataset);
  const auto spec = models::ModelSpec::for_architecture(models::parse_architecture(o.arch));
  eval::CvOptions cv;
  cv.train.epochs = o.epochs;
  cv.train.batch_size = o.batch_size;
  cv.train.adam.learning_rate = o.learning_rate;
  cv.seed = o.seed;
  cv.plain = cv.uq = false;
  cv.folds = {o.fold};
  cv.config_hash = data.config_hash;
  const bool to_file = o.out.extension() == ".ckpt";
  cv.checkpoint_dir = to_file ? (o.out.has_parent_path() ? o.out.parent_path() : fs::path(".")) : o.out;
  const auto res = eval::run_cv(spec, data, cv);
  if (!res.failures.empty()) throw std::runtime_error(res.failures.front().error);
  const auto written = eval::fold_checkpoint_path(*cv.checkpoint_dir, spec, o.fold);
  if (to_file && written != o.out) {
    fs::rename(written, o.out);
    return o.out;
  }
  return written;
}

eval::Predictions predict_standalone(const PredictOptions& o) {
  if (o.k < 0) throw std::invalid_argument("k must be non-negative");
  const auto ckpt = models::load_checkpoint(o.checkpoint);
  const auto data = dataset::load_dataset(o.dataset);
  const int fold = ckpt.metadata.fold;
  if (fold < 0 || fold >= data.plan.k)
    throw std::invalid_argument("checkpoint fold " + std::to_string(fold) + " does not exist in this dataset");
  auto net = models::restore(ckpt);
  const auto idx = data.plan.test_indices(data.set, fold);
  const auto x = dataset::gather_normalized(data.set, idx, ckpt.normalization);
  std::vector<uq::PredictionDistribution> dists;
  if (o.k == 0) {
    dists = uq::deterministic_predict(net, x);
  } else {
    uq::McOptions mc;
    mc.k = o.k;
    mc.seed = o.seed;
    dists = uq::mc_predict(net, x, mc);
  }
  eval::Predictions p;
  p.model = std::string(models::architecture_name(ckpt.spec.architecture));
  p.uq = o.k > 0;
  p.n_classes = ckpt.spec.n_classes;
  for (std::size_t k = 0; k < idx.size(); ++k) p.append(idx[k], fold, data.set.labels[idx[k]], dists[k].mean_probs);
  if (o.out.extension() == ".csv")
    eval::write_predictions_csv(o.out, p, data.set);
  else
    eval::write_text(o.out, json{{"config_hash", ckpt.metadata.config_hash}, {"predictions", p.to_json()}}.dump() + "\n");
  return p;
}

eval::EvalReport evaluate_standalone(const EvaluateOptions& o) {
  const auto data = dataset::load_dataset(o.dataset);
  const auto spec = models::ModelSpec::for_architecture(models::parse_architecture(o.arch));
  eval::CvOptions cv;
  cv.train.epochs = o.epochs;
  cv.train.batch_size = o.batch_size;
  cv.seed = o.seed;
  cv.plain = !o.uq;
  cv.uq = o.uq;
  cv.mc_passes = o.k;
  cv.checkpoint_dir = o.out / "checkpoints";
  cv.config_hash = data.config_hash;
  const auto res = eval::run_cv(spec, data, cv);
  auto report = eval::score_predictions(o.uq ? res.uq : res.plain, data.set, data.plan.k, res.failures, data.config_hash);
  report.mc_passes = o.uq ? o.k : 0;
  report.runtime = {{"epochs", o.epochs}, {"batch_size", o.batch_size}, {"seed", o.seed}};
  eval::render_reports({report}, o.out);
  eval::append_json_line(o.out / "ledger.jsonl", {{"config_hash", data.config_hash},
                                                  {"dataset_hash", to_hex(hash_file(o.dataset / "windows.bin"))},
                                                  {"seed", o.seed},
                                                  {"model", report.label()},
                                                  {"accuracy", report.mean.accuracy}});
  return report;
}

fs::path visualize_standalone(const VisualizeOptions& o) {
  const auto ckpt = models::load_checkpoint(o.checkpoint);
  const auto data = dataset::load_dataset(o.dataset);
  const std::string stem = std::string(models::architecture_name(ckpt.spec.architecture)) + "-" + o.layer;
  embed_fold(ckpt, data, ckpt.metadata.fold, o.layer, o.perplexity, o.iterations, o.seed, o.out, stem);
  return o.out / ("tsne-" + stem + ".svg");
}

}  // namespace windfd::pipeline
