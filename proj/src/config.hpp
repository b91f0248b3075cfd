#pragma once

#include <string>
#include <vector>

#include "dataset.hpp"
#include "orchestrator.hpp"
#include "text_encoder.hpp"

namespace ufg {

struct DatasetConfig {
  std::string name = "ml100k";  // "ml100k" | "generic"
  std::string data_path;
  std::string user_path;  // ml100k only
  std::size_t max_users = 0;  // 0 keeps every user
  std::string split_mode = "first";  // "first" | "last"
};

struct OutputConfig {
  std::string dir = ".";
  std::string metrics_csv = "metrics.csv";
  std::string graph_dump;  // TSV of graph edges per rebuild; empty = off
  std::string snapshot;    // binary model dump at final round; empty = off
};

struct ExperimentSpec {
  DatasetConfig dataset;
  EncoderConfig encoder;
  FederationConfig federation;
  OutputConfig output;
  std::vector<double> dp_sweep_alphas = {0.05, 0.1, 0.2, 0.3, 0.4};
  std::vector<std::string> ablation_variants = {"full", "nT", "nJ", "nB",
                                                "fedavg"};
};

// Strict parse: unknown keys are rejected, every value is type-checked, and
// defaults fill anything omitted. Validation of ranges happens here too;
// path existence is checked separately by validate_spec_paths.
ExperimentSpec parse_config_json(const std::string& json_text);
ExperimentSpec parse_config_file(const std::string& path);
std::string spec_to_json(const ExperimentSpec& spec);

void validate_spec_paths(const ExperimentSpec& spec);

// Loads, optionally subsamples, and splits the configured dataset.
InteractionDataset open_dataset(const ExperimentSpec& spec);

}  // namespace ufg
