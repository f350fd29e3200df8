#include "windfd/pipeline/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "windfd/common/hashing.hpp"
#include "windfd/common/random.hpp"
#include "windfd/models/model_spec.hpp"

namespace windfd::pipeline {

using nlohmann::json;

Profile parse_profile(std::string_view text) {
  if (text == "paper-scale" || text == "paper") return Profile::Paper;
  if (text == "desk-scale" || text == "desk") return Profile::Desk;
  throw std::invalid_argument("unknown profile '" + std::string(text) + "' (expected paper-scale or desk-scale)");
}

std::string_view profile_name(Profile profile) {
  return profile == Profile::Paper ? "paper-scale" : "desk-scale";
}

RunConfig RunConfig::defaults(Profile profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == Profile::Paper) {
    c.simulation.healthy_runs = 140;
    c.simulation.fault_runs = 40;
    c.simulation.duration_s = 600.0;
    c.model.epochs = 50;
    c.output_root = "runs/paper";
  }
  return c;
}

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw std::invalid_argument("unknown config key '" + where + "." + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

json controller_json(const turbsim::SimulatorConfig& s) {
  const auto& c = s.controller;
  return {{"kp", c.kp},
          {"ki", c.ki},
          {"filter_corner_hz", c.filter_corner_hz},
          {"schedule_knee_deg", c.schedule_knee_deg},
          {"sensor_faults_feed_controller", s.sensor_faults_feed_controller}};
}

}  // namespace

json RunConfig::to_json() const {
  return {{"profile", profile_name(profile)},
          {"seed", seed},
          {"output_root", output_root.string()},
          {"simulation",
           {{"healthy_runs", simulation.healthy_runs},
            {"fault_runs", simulation.fault_runs},
            {"duration_s", simulation.duration_s},
            {"mean_wind", simulation.mean_wind},
            {"turbulence_intensity", simulation.turbulence_intensity},
            {"controller", controller_json(simulation.simulator)}}},
          {"dataset", {{"window", dataset.window}, {"stride", dataset.stride}, {"folds", dataset.folds}}},
          {"model",
           {{"architectures", model.architectures},
            {"epochs", model.epochs},
            {"batch_size", model.batch_size},
            {"learning_rate", model.learning_rate},
            {"baselines", model.baselines},
            {"tree_max_depth", model.tree_max_depth},
            {"forest_estimators", model.forest_estimators}}},
          {"uq", {{"enabled", uq.enabled}, {"k", uq.k}}},
          {"visualize",
           {{"enabled", visualize.enabled},
            {"architecture", visualize.architecture},
            {"layers", visualize.layers},
            {"fold", visualize.fold},
            {"perplexity", visualize.perplexity},
            {"iterations", visualize.iterations}}}};
}

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, "config", {"profile", "seed", "output_root", "simulation", "dataset", "model", "uq", "visualize"});
  RunConfig c = defaults(parse_profile(j.value("profile", "desk-scale")));
  try {
    read(j, "seed", c.seed);
    if (j.contains("output_root")) c.output_root = j["output_root"].get<std::string>();
    if (j.contains("simulation")) {
      const auto& s = j["simulation"];
      check_keys(s, "simulation",
                 {"healthy_runs", "fault_runs", "duration_s", "mean_wind", "turbulence_intensity", "controller"});
      read(s, "healthy_runs", c.simulation.healthy_runs);
      read(s, "fault_runs", c.simulation.fault_runs);
      read(s, "duration_s", c.simulation.duration_s);
      read(s, "mean_wind", c.simulation.mean_wind);
      read(s, "turbulence_intensity", c.simulation.turbulence_intensity);
      if (s.contains("controller")) {
        const auto& k = s["controller"];
        check_keys(k, "simulation.controller",
                   {"kp", "ki", "filter_corner_hz", "schedule_knee_deg", "sensor_faults_feed_controller"});
        auto& ctl = c.simulation.simulator.controller;
        read(k, "kp", ctl.kp);
        read(k, "ki", ctl.ki);
        read(k, "filter_corner_hz", ctl.filter_corner_hz);
        read(k, "schedule_knee_deg", ctl.schedule_knee_deg);
        read(k, "sensor_faults_feed_controller", c.simulation.simulator.sensor_faults_feed_controller);
      }
    }
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      check_keys(d, "dataset", {"window", "stride", "folds"});
      read(d, "window", c.dataset.window);
      read(d, "stride", c.dataset.stride);
      read(d, "folds", c.dataset.folds);
    }
    if (j.contains("model")) {
      const auto& m = j["model"];
      check_keys(m, "model",
                 {"architectures", "epochs", "batch_size", "learning_rate", "baselines", "tree_max_depth",
                  "forest_estimators"});
      read(m, "architectures", c.model.architectures);
      read(m, "epochs", c.model.epochs);
      read(m, "batch_size", c.model.batch_size);
      read(m, "learning_rate", c.model.learning_rate);
      read(m, "baselines", c.model.baselines);
      read(m, "tree_max_depth", c.model.tree_max_depth);
      read(m, "forest_estimators", c.model.forest_estimators);
    }
    if (j.contains("uq")) {
      const auto& u = j["uq"];
      check_keys(u, "uq", {"enabled", "k"});
      read(u, "enabled", c.uq.enabled);
      read(u, "k", c.uq.k);
    }
    if (j.contains("visualize")) {
      const auto& v = j["visualize"];
      check_keys(v, "visualize", {"enabled", "architecture", "layers", "fold", "perplexity", "iterations"});
      read(v, "enabled", c.visualize.enabled);
      read(v, "architecture", c.visualize.architecture);
      read(v, "layers", c.visualize.layers);
      read(v, "fold", c.visualize.fold);
      read(v, "perplexity", c.visualize.perplexity);
      read(v, "iterations", c.visualize.iterations);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("invalid config: " + m); };
  if (simulation.healthy_runs < 1) fail("simulation.healthy_runs must be at least 1");
  if (simulation.fault_runs < 1) fail("simulation.fault_runs must be at least 1");
  if (!(simulation.duration_s > 0.0)) fail("simulation.duration_s must be positive");
  if (!(simulation.mean_wind >= 0.5 && simulation.mean_wind <= 40.0)) fail("simulation.mean_wind must be in [0.5, 40]");
  if (!(simulation.turbulence_intensity >= 0.0)) fail("simulation.turbulence_intensity must be non-negative");
  try {
    simulation.simulator.validate();
  } catch (const std::exception& e) {
    fail(std::string("simulation.controller: ") + e.what());
  }
  if (dataset.window < 1) fail("dataset.window must be positive");
  if (dataset.stride < 1) fail("dataset.stride must be positive");
  if (dataset.folds < 2) fail("dataset.folds must be at least 2 (got " + std::to_string(dataset.folds) + ")");
  const int runs = simulation.healthy_runs + 7 * simulation.fault_runs;
  if (dataset.folds > runs) fail("dataset.folds exceeds the number of runs");
  if (model.architectures.empty() && !model.baselines) fail("model lists no architectures and no baselines");
  for (const auto& a : model.architectures) {
    try {
      models::parse_architecture(a);
    } catch (const std::exception&) {
      fail("model.architectures contains unknown '" + a + "'");
    }
  }
  if (model.epochs < 1) fail("model.epochs must be positive");
  if (model.batch_size < 1) fail("model.batch_size must be positive");
  if (!(model.learning_rate > 0.0)) fail("model.learning_rate must be positive");
  if (model.tree_max_depth < 1) fail("model.tree_max_depth must be positive");
  if (model.forest_estimators < 1) fail("model.forest_estimators must be positive");
  if (uq.k < 1) fail("uq.k must be at least 1");
  if (visualize.enabled) {
    try {
      models::parse_architecture(visualize.architecture);
    } catch (const std::exception&) {
      fail("visualize.architecture is unknown");
    }
    for (const auto& l : visualize.layers)
      if (l != "fusion1" && l != "fusion2") fail("visualize.layers accepts fusion1 and fusion2 only");
    if (visualize.fold < 0 || visualize.fold >= dataset.folds) fail("visualize.fold is outside the fold range");
    if (!(visualize.perplexity > 0.0)) fail("visualize.perplexity must be positive");
    if (visualize.iterations < 1) fail("visualize.iterations must be positive");
  }
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("output_root");
  return to_hex(fnv1a(j.dump()));
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

void apply_env_overrides(RunConfig& config) {
  if (const char* s = std::getenv("WINDFD_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') throw std::invalid_argument("WINDFD_SEED is not an unsigned integer: " + std::string(s));
    config.seed = v;
  }
  if (const char* o = std::getenv("WINDFD_OUTPUT_ROOT"); o && *o) config.output_root = o;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = RunConfig::from_json(j);
  apply_env_overrides(c);
  c.validate();
  return c;
}

}  // namespace windfd::pipeline
