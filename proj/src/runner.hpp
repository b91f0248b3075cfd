#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "orchestrator.hpp"

namespace ufg {

struct NamedRun {
  std::string name;
  double alpha = -1.0;  // >= 0 only for dp-sweep runs
  ExperimentResult result;
};

struct RunOutput {
  enum class Kind { Single, Ablation, DpSweep };
  Kind kind = Kind::Single;
  std::vector<NamedRun> runs;
  // Final-round client models; captured only for single runs when the spec
  // configures a snapshot path.
  std::vector<ClientModelParams> final_clients;
  std::size_t encoder_calls = 0;
};

RunOutput run_single(const ExperimentSpec& spec, const InteractionDataset& ds);
RunOutput run_ablation_suite(const ExperimentSpec& spec,
                             const InteractionDataset& ds,
                             const std::vector<std::string>& variants);
RunOutput run_dp_sweep(const ExperimentSpec& spec, const InteractionDataset& ds,
                       const std::vector<double>& alphas);

// Writes every configured artifact (metrics CSVs, summary CSV, graph dump,
// snapshot) under spec.output.dir using atomic write-then-rename.
void write_outputs(const ExperimentSpec& spec, const RunOutput& out);

}  // namespace ufg
