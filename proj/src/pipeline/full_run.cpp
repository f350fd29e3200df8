#include "windfd/pipeline/full_run.hpp"

#include "windfd/common/logging.hpp"
#include "windfd/eval/report.hpp"

namespace windfd::pipeline {

RunSummary full_run(const RunConfig& config, bool force) {
  config.validate();
  RunContext ctx(config);
  RunLock lock(ctx.paths().lock());
  RunSummary summary{ctx.paths().root, ctx.config_hash(), {}};
  for (Stage s : kAllStages) {
    if (s == Stage::Visualize && !config.visualize.enabled) continue;
    summary.stages.push_back(run_stage(ctx, s, force));
  }
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& o : summary.stages) stages.push_back(o.record.to_json());
  nlohmann::json cfg = config.to_json();
  cfg.erase("output_root");
  eval::write_text(ctx.paths().manifest(),
                   nlohmann::json{{"config_hash", ctx.config_hash()}, {"config", cfg}, {"stages", stages}}.dump(2) +
                       "\n");
  log::info("run complete: " + ctx.paths().root.string());
  return summary;
}

StageOutcome run_single_stage(const RunConfig& config, Stage stage, bool force) {
  config.validate();
  RunContext ctx(config);
  RunLock lock(ctx.paths().lock());
  return run_stage(ctx, stage, force);
}

}  // namespace windfd::pipeline
