#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "windfd/common/errors.hpp"
#include "windfd/common/logging.hpp"
#include "windfd/pipeline/full_run.hpp"
#include "windfd/pipeline/run_config.hpp"
#include "windfd/pipeline/standalone.hpp"

namespace {

using namespace windfd;
using pipeline::Stage;

enum Exit { kOk = 0, kFailure = 1, kStageFailure = 2, kUsage = 3 };

struct ConfigArgs {
  std::string config;
  std::string profile;
  bool force = false;
};

void add_config_args(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.config, "Run config file (JSON)");
  cmd->add_option("--profile", a.profile, "Defaults to use without a config file: desk-scale or paper-scale");
  cmd->add_flag("--force", a.force, "Rerun even when outputs are up to date");
}

pipeline::RunConfig resolve_config(const ConfigArgs& a) {
  if (!a.config.empty()) return pipeline::load_run_config(a.config);
  auto c = pipeline::RunConfig::defaults(pipeline::parse_profile(a.profile.empty() ? "desk-scale" : a.profile));
  pipeline::apply_env_overrides(c);
  c.validate();
  return c;
}

bool config_mode(const ConfigArgs& a) { return !a.config.empty() || !a.profile.empty(); }

void print_stage(const pipeline::StageOutcome& o) {
  std::cout << pipeline::stage_name(o.stage) << ": " << (o.skipped ? "skipped (up to date)" : "done") << "\n";
}

bool parse_on_off(const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw std::invalid_argument("expected on or off, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wind turbine fault detection laboratory: simulate, build datasets, train, predict, evaluate"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug, info, warn or error");

  // simulate
  ConfigArgs sim_cfg;
  pipeline::SimulateOptions sim;
  std::string sim_out;
  auto* c_sim = app.add_subcommand("simulate", "Simulate turbine runs");
  add_config_args(c_sim, sim_cfg);
  c_sim->add_option("--scenario", sim.scenario, "healthy, F1..F7 or a scenario name");
  c_sim->add_option("--runs", sim.runs, "Number of runs");
  c_sim->add_option("--duration", sim.duration_s, "Seconds per run");
  c_sim->add_option("--seed", sim.seed, "Seed");
  c_sim->add_option("--mean-wind", sim.mean_wind, "Mean wind speed (m/s)");
  c_sim->add_option("--ti", sim.turbulence_intensity, "Turbulence intensity");
  c_sim->add_option("--out", sim_out, "Output directory");

  // build-dataset
  ConfigArgs ds_cfg;
  pipeline::BuildDatasetOptions ds;
  std::string ds_manifest, ds_out;
  auto* c_ds = app.add_subcommand("build-dataset", "Window traces and assign folds");
  add_config_args(c_ds, ds_cfg);
  c_ds->add_option("--manifest", ds_manifest, "Trace manifest");
  c_ds->add_option("--window", ds.window, "Window length (samples)");
  c_ds->add_option("--stride", ds.stride, "Stride (samples)");
  c_ds->add_option("--folds", ds.folds, "Number of folds");
  c_ds->add_option("--seed", ds.seed, "Fold seed");
  c_ds->add_option("--out", ds_out, "Dataset directory");

  // train
  ConfigArgs tr_cfg;
  pipeline::TrainOptions tr;
  std::string tr_dataset, tr_out;
  auto* c_tr = app.add_subcommand("train", "Train a classifier");
  add_config_args(c_tr, tr_cfg);
  c_tr->add_option("--arch", tr.arch, "casu2net, simple-cnn or multi-headed");
  c_tr->add_option("--dataset", tr_dataset, "Dataset directory");
  c_tr->add_option("--fold", tr.fold, "Held-out fold");
  c_tr->add_option("--epochs", tr.epochs, "Epochs");
  c_tr->add_option("--batch", tr.batch_size, "Batch size");
  c_tr->add_option("--lr", tr.learning_rate, "Adam learning rate");
  c_tr->add_option("--seed", tr.seed, "Seed");
  c_tr->add_option("--out", tr_out, "Checkpoint file or directory");

  // predict
  ConfigArgs pr_cfg;
  pipeline::PredictOptions pr;
  std::string pr_ckpt, pr_dataset, pr_out;
  auto* c_pr = app.add_subcommand("predict", "Predict held-out windows");
  add_config_args(c_pr, pr_cfg);
  c_pr->add_option("--checkpoint", pr_ckpt, "Checkpoint file");
  c_pr->add_option("--dataset", pr_dataset, "Dataset directory");
  c_pr->add_option("--k", pr.k, "MC-dropout passes (0 = single deterministic pass)");
  c_pr->add_option("--seed", pr.seed, "Seed");
  c_pr->add_option("--out", pr_out, "Output file (.csv or .json)");

  // evaluate
  ConfigArgs ev_cfg;
  pipeline::EvaluateOptions ev;
  std::string ev_dataset, ev_out, ev_uq = "on";
  auto* c_ev = app.add_subcommand("evaluate", "Cross-validate and report");
  add_config_args(c_ev, ev_cfg);
  c_ev->add_option("--arch", ev.arch, "casu2net, simple-cnn or multi-headed");
  c_ev->add_option("--dataset", ev_dataset, "Dataset directory");
  c_ev->add_option("--uq", ev_uq, "on or off");
  c_ev->add_option("--k", ev.k, "MC-dropout passes");
  c_ev->add_option("--seeds,--seed", ev.seed, "Seed");
  c_ev->add_option("--epochs", ev.epochs, "Epochs per fold");
  c_ev->add_option("--batch", ev.batch_size, "Batch size");
  c_ev->add_option("--out", ev_out, "Report directory");

  // visualize
  ConfigArgs vi_cfg;
  pipeline::VisualizeOptions vi;
  std::string vi_ckpt, vi_dataset, vi_out = ".";
  auto* c_vi = app.add_subcommand("visualize", "t-SNE of fusion-layer features");
  add_config_args(c_vi, vi_cfg);
  c_vi->add_option("--layer", vi.layer, "fusion1 or fusion2");
  c_vi->add_option("--checkpoint", vi_ckpt, "Checkpoint file");
  c_vi->add_option("--dataset", vi_dataset, "Dataset directory");
  c_vi->add_option("--perplexity", vi.perplexity, "Perplexity");
  c_vi->add_option("--iterations", vi.iterations, "Iterations");
  c_vi->add_option("--seed", vi.seed, "Seed");
  c_vi->add_option("--out", vi_out, "Figure directory");

  // full-run
  ConfigArgs fr_cfg;
  auto* c_fr = app.add_subcommand("full-run", "Run every stage from one config");
  add_config_args(c_fr, fr_cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (log_level == "debug") log::set_level(log::Level::Debug);
    else if (log_level == "info") log::set_level(log::Level::Info);
    else if (log_level == "warn") log::set_level(log::Level::Warn);
    else if (log_level == "error") log::set_level(log::Level::Error);
    else throw std::invalid_argument("unknown log level '" + log_level + "'");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  auto require = [](const std::string& v, const char* flag) {
    if (v.empty()) throw CLI::RequiredError(flag);
  };

  try {
    if (*c_fr) {
      const auto summary = pipeline::full_run(resolve_config(fr_cfg), fr_cfg.force);
      for (const auto& o : summary.stages) print_stage(o);
      std::cout << "run directory: " << summary.run_dir.string() << "\n";
      return kOk;
    }
    struct Staged {
      CLI::App* cmd;
      ConfigArgs* cfg;
      Stage stage;
    };
    for (const Staged& s : {Staged{c_sim, &sim_cfg, Stage::Simulate}, Staged{c_ds, &ds_cfg, Stage::BuildDataset},
                            Staged{c_tr, &tr_cfg, Stage::Train}, Staged{c_pr, &pr_cfg, Stage::Predict},
                            Staged{c_ev, &ev_cfg, Stage::Evaluate}, Staged{c_vi, &vi_cfg, Stage::Visualize}}) {
      if (*s.cmd && config_mode(*s.cfg)) {
        print_stage(pipeline::run_single_stage(resolve_config(*s.cfg), s.stage, s.cfg->force));
        return kOk;
      }
    }
    if (*c_sim) {
      require(sim_out, "--out");
      sim.out = sim_out;
      std::cout << "manifest: " << pipeline::simulate_standalone(sim).string() << "\n";
    } else if (*c_ds) {
      require(ds_manifest, "--manifest");
      require(ds_out, "--out");
      ds.manifest = ds_manifest;
      ds.out = ds_out;
      pipeline::build_dataset_standalone(ds);
      std::cout << "dataset: " << ds_out << "\n";
    } else if (*c_tr) {
      require(tr_dataset, "--dataset");
      require(tr_out, "--out");
      tr.dataset = tr_dataset;
      tr.out = tr_out;
      std::cout << "checkpoint: " << pipeline::train_standalone(tr).string() << "\n";
    } else if (*c_pr) {
      require(pr_ckpt, "--checkpoint");
      require(pr_dataset, "--dataset");
      require(pr_out, "--out");
      pr.checkpoint = pr_ckpt;
      pr.dataset = pr_dataset;
      pr.out = pr_out;
      const auto p = pipeline::predict_standalone(pr);
      std::cout << p.size() << " predictions: " << pr_out << "\n";
    } else if (*c_ev) {
      require(ev_dataset, "--dataset");
      require(ev_out, "--out");
      ev.dataset = ev_dataset;
      ev.out = ev_out;
      ev.uq = parse_on_off(ev_uq);
      const auto r = pipeline::evaluate_standalone(ev);
      std::cout << r.label() << " accuracy " << r.mean.accuracy << "\n";
    } else if (*c_vi) {
      require(vi_ckpt, "--checkpoint");
      require(vi_dataset, "--dataset");
      vi.checkpoint = vi_ckpt;
      vi.dataset = vi_dataset;
      vi.out = vi_out;
      std::cout << "figure: " << pipeline::visualize_standalone(vi).string() << "\n";
    }
    return kOk;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const StageFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
