#include "runner.hpp"

#include <cstdio>
#include <filesystem>

#include "error.hpp"
#include "io.hpp"
#include "log.hpp"

namespace ufg {

namespace {

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", a);
  return buf;
}

const RoundMetrics& final_round(const NamedRun& run) {
  if (run.result.rounds.empty())
    throw_runtime("run '" + run.name + "' produced no metrics rows");
  return run.result.rounds.back();
}

}  // namespace

RunOutput run_single(const ExperimentSpec& spec, const InteractionDataset& ds) {
  RunOutput out;
  out.kind = RunOutput::Kind::Single;
  EmbeddingTable table(spec.encoder);
  Orchestrator orch(ds, table, spec.federation,
                    !spec.output.graph_dump.empty());
  NamedRun run;
  run.name = "run";
  run.result = orch.run();
  out.runs.push_back(std::move(run));
  out.encoder_calls = table.encoder_calls();
  if (!spec.output.snapshot.empty()) out.final_clients = orch.clients();
  return out;
}

RunOutput run_ablation_suite(const ExperimentSpec& spec,
                             const InteractionDataset& ds,
                             const std::vector<std::string>& variants) {
  RunOutput out;
  out.kind = RunOutput::Kind::Ablation;
  EmbeddingTable table(spec.encoder);
  auto results = run_ablation(ds, table, spec.federation, variants);
  for (auto& vr : results)
    out.runs.push_back({vr.name, -1.0, std::move(vr.result)});
  out.encoder_calls = table.encoder_calls();
  return out;
}

RunOutput run_dp_sweep(const ExperimentSpec& spec, const InteractionDataset& ds,
                       const std::vector<double>& alphas) {
  if (alphas.empty()) throw_config("dp sweep needs at least one alpha");
  RunOutput out;
  out.kind = RunOutput::Kind::DpSweep;
  EmbeddingTable table(spec.encoder);
  for (double a : alphas) {
    if (a < 0.0) throw_config("dp sweep alpha must be >= 0");
    UFG_LOG_INFO("dp sweep alpha=%s", alpha_tag(a).c_str());
    FederationConfig cfg = spec.federation;
    cfg.dp_alpha = a;
    NamedRun run;
    run.name = "alpha=" + alpha_tag(a);
    run.alpha = a;
    run.result = run_experiment(ds, table, cfg);
    out.runs.push_back(std::move(run));
  }
  out.encoder_calls = table.encoder_calls();
  return out;
}

void write_outputs(const ExperimentSpec& spec, const RunOutput& out) {
  namespace fs = std::filesystem;
  const fs::path dir(spec.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);

  const fs::path metrics_name(spec.output.metrics_csv);
  const std::string stem = metrics_name.stem().string();
  const std::string ext = metrics_name.extension().string().empty()
                              ? ".csv"
                              : metrics_name.extension().string();

  switch (out.kind) {
    case RunOutput::Kind::Single: {
      const NamedRun& run = out.runs.at(0);
      atomic_write_file((dir / spec.output.metrics_csv).string(),
                        format_metrics_csv(run.result.rounds));
      if (!spec.output.graph_dump.empty())
        atomic_write_file((dir / spec.output.graph_dump).string(),
                          format_graph_dump_tsv(run.result.graph_dump));
      if (!spec.output.snapshot.empty())
        atomic_write_file((dir / spec.output.snapshot).string(),
                          format_snapshot(out.final_clients));
      break;
    }
    case RunOutput::Kind::Ablation: {
      std::string summary = "variant,hr10,ndcg10,loss\n";
      for (const NamedRun& run : out.runs) {
        atomic_write_file((dir / (stem + "_" + run.name + ext)).string(),
                          format_metrics_csv(run.result.rounds));
        const RoundMetrics& last = final_round(run);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n",
                      run.name.c_str(), last.hr10, last.ndcg10, last.loss);
        summary += buf;
      }
      atomic_write_file((dir / (stem + "_ablation" + ext)).string(), summary);
      break;
    }
    case RunOutput::Kind::DpSweep: {
      std::string summary = "alpha,hr10,ndcg10,loss\n";
      for (const NamedRun& run : out.runs) {
        atomic_write_file(
            (dir / (stem + "_alpha" + alpha_tag(run.alpha) + ext)).string(),
            format_metrics_csv(run.result.rounds));
        const RoundMetrics& last = final_round(run);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,%.6f\n", run.alpha,
                      last.hr10, last.ndcg10, last.loss);
        summary += buf;
      }
      atomic_write_file((dir / (stem + "_dp_sweep" + ext)).string(), summary);
      break;
    }
  }
}

}  // namespace ufg
