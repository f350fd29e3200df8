#include "windfd/pipeline/stages.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "windfd/common/errors.hpp"
#include "windfd/common/hashing.hpp"
#include "windfd/common/logging.hpp"
#include "windfd/common/random.hpp"
#include "windfd/dataset/corpus.hpp"
#include "windfd/dataset/folds.hpp"
#include "windfd/eval/report.hpp"
#include "windfd/eval/tsne.hpp"
#include "windfd/models/checkpoint.hpp"
#include "windfd/turbsim/trace_io.hpp"

namespace windfd::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStageNames[] = {"simulate", "build-dataset", "train", "predict", "evaluate", "visualize"};

std::string hash_json(const json& j) { return to_hex(fnv1a(j.dump())); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string(), std::string("malformed JSON (") + e.what() + ")");
  }
}

std::string relative(const RunPaths& paths, const fs::path& p) {
  return fs::relative(p, paths.root).generic_string();
}

fs::path record_path(const RunPaths& paths, Stage stage) {
  return paths.stages() / (std::string(stage_name(stage)) + ".json");
}

}  // namespace

std::string_view stage_name(Stage stage) { return kStageNames[static_cast<int>(stage)]; }

Stage parse_stage(std::string_view text) {
  for (Stage s : kAllStages)
    if (stage_name(s) == text) return s;
  throw std::invalid_argument("unknown stage '" + std::string(text) + "'");
}

std::string StageRecord::artifact_hash() const {
  json j = json::object();
  for (const auto& [path, h] : artifacts) j[path] = h;
  return hash_json(j);
}

json StageRecord::to_json() const {
  return {{"stage", stage}, {"key", key}, {"config_hash", config_hash}, {"artifacts", artifacts}, {"details", details}};
}

StageRecord StageRecord::from_json(const json& j) {
  StageRecord r;
  r.stage = j.at("stage").get<std::string>();
  r.key = j.at("key").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  r.details = j.value("details", json::object());
  return r;
}

std::optional<StageRecord> read_stage_record(const RunPaths& paths, Stage stage) {
  const auto p = record_path(paths, stage);
  if (!fs::exists(p)) return std::nullopt;
  try {
    return StageRecord::from_json(read_json_file(p));
  } catch (const std::exception& e) {
    log::warn("ignoring unreadable stage record " + p.string() + ": " + e.what());
    return std::nullopt;
  }
}

RunLock::RunLock(const fs::path& path) : path_(path) {
  fs::create_directories(path.parent_path());
  const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0)
    throw std::runtime_error("run directory is locked by another run (" + path.string() +
                             "); remove the file if no run is active");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

RunContext::RunContext(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  paths_.root = config_.output_root;
  hash_ = config_.hash();
  fs::create_directories(paths_.root);
  if (fs::exists(paths_.config())) {
    const json existing = read_json_file(paths_.config());
    const std::string other = existing.value("config_hash", "");
    if (other != hash_)
      throw std::runtime_error("run directory " + paths_.root.string() + " belongs to config hash " + other +
                               ", not " + hash_ + "; use a different output root");
  } else {
    json j = config_.to_json();
    j.erase("output_root");
    eval::write_text(paths_.config(), json{{"config_hash", hash_}, {"config", j}}.dump(2) + "\n");
  }
}

void RunContext::progress(Stage stage, std::string_view event, const json& detail) const {
  json line{{"stage", stage_name(stage)}, {"event", event}, {"config_hash", hash_}};
  if (!detail.is_null()) line["detail"] = detail;
  eval::append_json_line(paths_.progress(), line);
}

json PredictionFile::to_json() const {
  json f = json::array();
  for (const auto& x : failures) f.push_back({{"fold", x.fold}, {"error", x.error}});
  return {{"config_hash", config_hash}, {"k_folds", k_folds}, {"failures", f}, {"predictions", predictions.to_json()}};
}

PredictionFile PredictionFile::from_json(const json& j) {
  PredictionFile p;
  p.config_hash = j.at("config_hash").get<std::string>();
  p.k_folds = j.at("k_folds").get<int>();
  for (const auto& x : j.at("failures")) p.failures.push_back({x.at("fold").get<int>(), x.at("error").get<std::string>()});
  p.predictions = eval::Predictions::from_json(j.at("predictions"));
  return p;
}

void write_prediction_file(const fs::path& path, const PredictionFile& file) {
  eval::write_text(path, file.to_json().dump() + "\n");
}

PredictionFile read_prediction_file(const fs::path& path) { return PredictionFile::from_json(read_json_file(path)); }

std::vector<double> layer_features(models::Network& net, const std::vector<float>& inputs, std::size_t n,
                                   const std::string& layer, std::size_t& width) {
  if (layer != "fusion1" && layer != "fusion2")
    throw std::invalid_argument("unknown layer '" + layer + "' (expected fusion1 or fusion2)");
  const auto per = static_cast<std::size_t>(net.sample_values());
  if (inputs.size() != n * per) throw std::invalid_argument("input size does not match the window count");
  std::vector<double> out;
  width = 0;
  Rng unused(0);
  constexpr std::size_t kBatch = 256;
  for (std::size_t b0 = 0; b0 < n; b0 += kBatch) {
    const std::size_t nb = std::min(kBatch, n - b0);
    models::Taps taps;
    net.forward(inputs.data() + b0 * per, static_cast<Eigen::Index>(nb), nn::Mode::Infer, unused, &taps);
    const models::Matf& m = layer == "fusion1" ? taps.fusion1 : taps.fusion2;
    width = static_cast<std::size_t>(m.rows());
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m(r, c));
  }
  return out;
}

Embedding embed_fold(const models::Checkpoint& ckpt, const dataset::StoredDataset& data, int fold,
                     const std::string& layer, double perplexity, int iterations, std::uint64_t seed,
                     const fs::path& out_dir, const std::string& stem) {
  if (fold < 0 || fold >= data.plan.k) throw std::invalid_argument("fold " + std::to_string(fold) + " is outside the plan");
  auto net = models::restore(ckpt);
  const auto idx = data.plan.test_indices(data.set, fold);
  const auto x = dataset::gather_normalized(data.set, idx, ckpt.normalization);
  std::size_t width = 0;
  const auto features = layer_features(net, x, idx.size(), layer, width);

  Embedding e;
  e.layer = layer;
  for (auto i : idx) e.labels.push_back(data.set.labels[i]);
  eval::TsneOptions opts;
  opts.perplexity = perplexity;
  opts.iterations = iterations;
  opts.seed = seed;
  e.points = eval::tsne_embed(features, idx.size(), width, opts);
  std::size_t distinct = 0;
  {
    std::vector<int> seen(8, 0);
    for (int l : e.labels) distinct += seen[static_cast<std::size_t>(l)]++ == 0 ? 1 : 0;
  }
  e.silhouette = distinct >= 2 ? eval::silhouette_score(e.points, idx.size(), 2, e.labels) : 0.0;

  const std::string title = std::string(models::architecture_name(ckpt.spec.architecture)) + " " + layer +
                            " t-SNE (fold " + std::to_string(fold) + ")";
  eval::write_text(out_dir / ("tsne-" + stem + ".svg"),
                   "<!-- config_hash " + ckpt.metadata.config_hash + " -->\n" +
                       eval::scatter_svg(e.points, e.labels, title));
  json j{{"config_hash", ckpt.metadata.config_hash},
         {"layer", layer},
         {"fold", fold},
         {"perplexity", perplexity},
         {"iterations", iterations},
         {"seed", seed},
         {"features", width},
         {"silhouette", e.silhouette},
         {"labels", e.labels},
         {"points", e.points}};
  eval::write_text(out_dir / ("tsne-" + stem + ".json"), j.dump() + "\n");
  return e;
}

namespace {

// --- individual stages --------------------------------------------------

struct StageResult {
  std::vector<fs::path> outputs;
  json details = json::object();
};

std::string arch_model_seed_tag(const std::string& arch) { return "model:" + arch; }

const StageRecord& require(const std::optional<StageRecord>& r, Stage upstream) {
  if (!r)
    throw std::runtime_error("stage '" + std::string(stage_name(upstream)) + "' has not completed in this run directory");
  return *r;
}

StageResult do_simulate(const RunContext& ctx) {
  const auto& c = ctx.config();
  const auto& sim = c.simulation;
  const auto& paths = ctx.paths();
  fs::create_directories(paths.traces());
  turbsim::CorpusManifest manifest;
  manifest.config_hash = ctx.config_hash();
  manifest.sample_rate = sim.simulator.sample_rate;
  StageResult out;
  const std::uint64_t base = c.stage_seed("simulate");
  std::uint64_t run = 0;
  for (int label = 0; label < turbsim::kNumClasses; ++label) {
    const auto kind = turbsim::fault_from_label(label);
    const int n = label == 0 ? sim.healthy_runs : sim.fault_runs;
    for (int r = 0; r < n; ++r, ++run) {
      char id[64];
      std::snprintf(id, sizeof id, "%s-%03d", std::string(turbsim::fault_name(kind)).c_str(), r);
      const std::uint64_t wind_seed = derive_seed(base, "wind", run);
      const auto wind = turbsim::generate_wind(wind_seed, sim.duration_s, 1.0 / sim.simulator.sample_rate,
                                               sim.mean_wind, sim.turbulence_intensity);
      auto trace = turbsim::run_simulation(sim.simulator, turbsim::FaultScenario::make(kind), wind, sim.duration_s, id);
      trace.wind_seed = wind_seed;
      const std::string file = std::string(id) + ".csv";
      turbsim::write_trace(paths.traces() / file, trace, ctx.config_hash());
      manifest.runs.push_back({id, file, label, wind_seed, sim.duration_s});
      out.outputs.push_back(paths.traces() / file);
    }
  }
  turbsim::write_manifest(paths.trace_manifest(), manifest);
  out.outputs.push_back(paths.trace_manifest());
  out.details["runs"] = manifest.runs.size();
  log::info("simulated " + std::to_string(manifest.runs.size()) + " runs");
  return out;
}

StageResult do_build_dataset(const RunContext& ctx) {
  const auto& c = ctx.config();
  const auto& paths = ctx.paths();
  const auto manifest = turbsim::read_manifest(paths.trace_manifest());
  if (manifest.config_hash != ctx.config_hash())
    throw std::runtime_error("trace manifest carries config hash " + manifest.config_hash);
  dataset::StoredDataset data;
  data.set = dataset::build_corpus(manifest, paths.traces(), c.dataset.window, c.dataset.stride);
  data.plan = dataset::make_folds(data.set, c.dataset.folds, c.stage_seed("folds"));
  data.fold_stats = dataset::fit_fold_stats(data.set, data.plan);
  data.config_hash = ctx.config_hash();
  dataset::save_dataset(paths.dataset(), data);
  StageResult out;
  out.outputs = {paths.dataset() / "windows.bin", paths.dataset() / "dataset.json"};
  out.details["windows"] = data.set.size();
  out.details["class_histogram"] = data.set.class_histogram();
  return out;
}

dataset::StoredDataset load_run_dataset(const RunContext& ctx) {
  auto data = dataset::load_dataset(ctx.paths().dataset());
  if (data.config_hash != ctx.config_hash())
    throw std::runtime_error("dataset carries config hash " + data.config_hash);
  return data;
}

eval::CvOptions cv_options(const RunContext& ctx, const std::string& arch) {
  const auto& c = ctx.config();
  eval::CvOptions o;
  o.train.epochs = c.model.epochs;
  o.train.batch_size = c.model.batch_size;
  o.train.adam.learning_rate = c.model.learning_rate;
  o.seed = derive_seed(c.seed, arch_model_seed_tag(arch));
  o.mc_passes = c.uq.k;
  o.checkpoint_dir = ctx.paths().checkpoints();
  o.config_hash = ctx.config_hash();
  return o;
}

json failures_json(const std::vector<eval::FoldFailure>& failures) {
  json f = json::array();
  for (const auto& x : failures) f.push_back({{"fold", x.fold}, {"error", x.error}});
  return f;
}

StageResult do_train(const RunContext& ctx) {
  const auto& c = ctx.config();
  const auto data = load_run_dataset(ctx);
  StageResult out;
  for (const auto& arch : c.model.architectures) {
    const auto spec = models::ModelSpec::for_architecture(models::parse_architecture(arch));
    auto o = cv_options(ctx, arch);
    o.plain = false;
    o.uq = false;
    o.progress = [&](const std::string& m) { ctx.progress(Stage::Train, "fold", m); };
    const auto res = eval::run_cv(spec, data, o);
    std::vector<int> failed;
    for (const auto& f : res.failures) failed.push_back(f.fold);
    for (int f = 0; f < data.plan.k; ++f)
      if (std::find(failed.begin(), failed.end(), f) == failed.end())
        out.outputs.push_back(eval::fold_checkpoint_path(*o.checkpoint_dir, spec, f));
    json losses = json::array();
    for (const auto& m : res.training)
      losses.push_back({{"fold", m.fold}, {"final_train_loss", m.train_loss.empty() ? 0.0 : m.train_loss.back()}});
    out.details[arch] = {{"failures", failures_json(res.failures)}, {"folds", losses}};
    if (res.failures.size() == static_cast<std::size_t>(data.plan.k))
      throw std::runtime_error(arch + " failed on every fold; first error: " + res.failures.front().error);
  }
  return out;
}

std::vector<eval::FoldFailure> failures_from(const json& j) {
  std::vector<eval::FoldFailure> out;
  for (const auto& x : j) out.push_back({x.at("fold").get<int>(), x.at("error").get<std::string>()});
  return out;
}

StageResult do_predict(const RunContext& ctx, const StageRecord& train) {
  const auto& c = ctx.config();
  const auto& paths = ctx.paths();
  const auto data = load_run_dataset(ctx);
  StageResult out;
  auto put = [&](const std::string& stem, const eval::Predictions& p, const std::vector<eval::FoldFailure>& failures) {
    PredictionFile f{ctx.config_hash(), data.plan.k, failures, p};
    write_prediction_file(paths.predictions() / (stem + ".json"), f);
    eval::write_predictions_csv(paths.predictions() / (stem + ".csv"), p, data.set);
    out.outputs.push_back(paths.predictions() / (stem + ".json"));
    out.outputs.push_back(paths.predictions() / (stem + ".csv"));
  };
  for (const auto& arch : c.model.architectures) {
    const auto spec = models::ModelSpec::for_architecture(models::parse_architecture(arch));
    auto o = cv_options(ctx, arch);
    o.uq = c.uq.enabled;
    auto failures = failures_from(train.details.at(arch).at("failures"));
    for (int f = 0; f < data.plan.k; ++f)
      if (std::none_of(failures.begin(), failures.end(), [f](const auto& x) { return x.fold == f; }))
        o.folds.push_back(f);
    o.progress = [&](const std::string& m) { ctx.progress(Stage::Predict, "fold", m); };
    auto res = eval::run_cv(spec, data, o);
    failures.insert(failures.end(), res.failures.begin(), res.failures.end());
    put(arch, res.plain, failures);
    if (c.uq.enabled) put(arch + "-uq", res.uq, failures);
  }
  if (c.model.baselines) {
    eval::BaselineOptions b;
    b.tree.max_depth = c.model.tree_max_depth;
    b.forest.max_depth = c.model.tree_max_depth;
    b.forest.n_estimators = c.model.forest_estimators;
    b.seed = c.stage_seed("baselines");
    const auto res = eval::baseline_classifiers(data.set, data.plan, b);
    put("decision-tree", res.tree, {});
    put("random-forest", res.forest, {});
  }
  return out;
}

std::vector<std::string> prediction_stems(const RunConfig& c) {
  std::vector<std::string> stems;
  for (const auto& arch : c.model.architectures) {
    stems.push_back(arch);
    if (c.uq.enabled) stems.push_back(arch + "-uq");
  }
  if (c.model.baselines) {
    stems.push_back("decision-tree");
    stems.push_back("random-forest");
  }
  return stems;
}

StageResult do_evaluate(const RunContext& ctx) {
  const auto& c = ctx.config();
  const auto& paths = ctx.paths();
  const auto started = std::chrono::steady_clock::now();
  const auto data = load_run_dataset(ctx);
  std::vector<eval::EvalReport> reports;
  for (const auto& stem : prediction_stems(c)) {
    const auto file = read_prediction_file(paths.predictions() / (stem + ".json"));
    if (file.config_hash != ctx.config_hash())
      throw std::runtime_error("predictions " + stem + " carry config hash " + file.config_hash);
    auto r = eval::score_predictions(file.predictions, data.set, file.k_folds, file.failures, ctx.config_hash());
    r.mc_passes = file.predictions.uq ? c.uq.k : 0;
    r.runtime = {{"window", c.dataset.window}, {"stride", c.dataset.stride}, {"seed", c.seed}};
    if (r.model == "decision-tree" || r.model == "random-forest") {
      r.runtime["max_depth"] = c.model.tree_max_depth;
      if (r.model == "random-forest") r.runtime["n_estimators"] = c.model.forest_estimators;
    } else {
      r.runtime["epochs"] = c.model.epochs;
      r.runtime["batch_size"] = c.model.batch_size;
      r.runtime["learning_rate"] = c.model.learning_rate;
    }
    reports.push_back(std::move(r));
  }
  StageResult out;
  out.outputs = eval::render_reports(reports, paths.reports());
  json acc = json::object();
  for (const auto& r : reports) acc[eval::report_slug(r)] = r.mean.accuracy;
  out.details["accuracy"] = acc;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  eval::append_json_line(paths.ledger(), {{"config_hash", ctx.config_hash()},
                                          {"dataset_hash", to_hex(hash_file(paths.dataset() / "windows.bin"))},
                                          {"seed", c.seed},
                                          {"reports", acc},
                                          {"evaluate_wall_time_s", wall}});
  return out;
}

StageResult do_visualize(const RunContext& ctx) {
  const auto& c = ctx.config();
  const auto& v = c.visualize;
  const auto data = load_run_dataset(ctx);
  const auto spec = models::ModelSpec::for_architecture(models::parse_architecture(v.architecture));
  const auto path = eval::fold_checkpoint_path(ctx.paths().checkpoints(), spec, v.fold);
  const auto ckpt = models::load_checkpoint(path, spec.hash());
  StageResult out;
  for (const auto& layer : v.layers) {
    const std::string stem = v.architecture + "-" + layer;
    const auto e = embed_fold(ckpt, data, v.fold, layer, v.perplexity, v.iterations, c.stage_seed("tsne"),
                              ctx.paths().figures(), stem);
    out.outputs.push_back(ctx.paths().figures() / ("tsne-" + stem + ".svg"));
    out.outputs.push_back(ctx.paths().figures() / ("tsne-" + stem + ".json"));
    out.details[layer] = {{"silhouette", e.silhouette}, {"points", e.labels.size()}};
  }
  return out;
}

json stage_block(const RunConfig& c, Stage stage) {
  json j = c.to_json();
  switch (stage) {
    case Stage::Simulate: return {{"simulation", j["simulation"]}, {"seed", c.stage_seed("simulate")}};
    case Stage::BuildDataset: return {{"dataset", j["dataset"]}, {"seed", c.stage_seed("folds")}};
    case Stage::Train: {
      json m = j["model"];
      m.erase("baselines");
      m.erase("tree_max_depth");
      m.erase("forest_estimators");
      return {{"model", m}, {"seed", c.seed}};
    }
    case Stage::Predict: return {{"model", j["model"]}, {"uq", j["uq"]}, {"seed", c.seed}};
    case Stage::Evaluate: return {{"model", j["model"]}, {"uq", j["uq"]}};
    case Stage::Visualize: return {{"visualize", j["visualize"]}, {"seed", c.stage_seed("tsne")}};
  }
  return {};
}

std::optional<Stage> upstream_of(Stage stage) {
  switch (stage) {
    case Stage::Simulate: return std::nullopt;
    case Stage::BuildDataset: return Stage::Simulate;
    case Stage::Train: return Stage::BuildDataset;
    case Stage::Predict: return Stage::Train;
    case Stage::Evaluate: return Stage::Predict;
    case Stage::Visualize: return Stage::Train;
  }
  return std::nullopt;
}

bool artifacts_intact(const RunPaths& paths, const StageRecord& r) {
  for (const auto& [rel, h] : r.artifacts) {
    const auto p = paths.root / rel;
    if (!fs::exists(p)) return false;
    if (to_hex(hash_file(p)) != h) return false;
  }
  return true;
}

}  // namespace

StageOutcome run_stage(const RunContext& ctx, Stage stage, bool force) {
  const auto& paths = ctx.paths();
  const std::string name(stage_name(stage));
  try {
    json key_src{{"stage", name}, {"config_hash", ctx.config_hash()}, {"block", stage_block(ctx.config(), stage)}};
    std::optional<StageRecord> up;
    if (auto u = upstream_of(stage)) {
      up = read_stage_record(paths, *u);
      key_src["upstream"] = require(up, *u).artifact_hash();
    }
    if (stage == Stage::Visualize) key_src["dataset"] = require(read_stage_record(paths, Stage::BuildDataset), Stage::BuildDataset).artifact_hash();
    const std::string key = hash_json(key_src);

    if (!force) {
      if (auto existing = read_stage_record(paths, stage);
          existing && existing->key == key && artifacts_intact(paths, *existing)) {
        ctx.progress(stage, "skip", {{"key", key}});
        log::info("stage " + name + ": up to date, skipped");
        return {stage, true, *existing};
      }
    }

    ctx.progress(stage, "start", {{"key", key}});
    const auto t0 = std::chrono::steady_clock::now();
    log::info("stage " + name + ": running");
    StageResult res;
    switch (stage) {
      case Stage::Simulate: res = do_simulate(ctx); break;
      case Stage::BuildDataset: res = do_build_dataset(ctx); break;
      case Stage::Train: res = do_train(ctx); break;
      case Stage::Predict: res = do_predict(ctx, *up); break;
      case Stage::Evaluate: res = do_evaluate(ctx); break;
      case Stage::Visualize: res = do_visualize(ctx); break;
    }
    StageRecord rec;
    rec.stage = name;
    rec.key = key;
    rec.config_hash = ctx.config_hash();
    rec.details = res.details;
    for (const auto& p : res.outputs) rec.artifacts[relative(paths, p)] = to_hex(hash_file(p));
    eval::write_text(record_path(paths, stage), rec.to_json().dump(2) + "\n");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.progress(stage, "done", {{"key", key}, {"artifacts", rec.artifacts.size()}, {"seconds", secs}});
    return {stage, false, rec};
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    try {
      ctx.progress(stage, "fail", {{"error", e.what()}});
    } catch (...) {
    }
    throw StageFailure(name, e.what());
  }
}

}  // namespace windfd::pipeline
