#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "client_model.hpp"
#include "dataset.hpp"
#include "server.hpp"
#include "text_encoder.hpp"

namespace ufg {

struct FederationConfig {
  std::size_t rounds = 100;       // T
  std::size_t local_epochs = 1;   // E
  double lr = 0.01;
  double lambda = 0.1;
  std::size_t embedding_dim = 32;  // d
  std::size_t heads = 2;
  std::size_t ffn_dim = 64;
  std::size_t seq_len = 50;  // L
  std::size_t top_k = 10;
  double dp_alpha = 0.0;
  std::size_t lite_interval = 1;  // G; 1 rebuilds the graph every round
  ReduceMode reduce_mode = ReduceMode::Mean;
  std::string aggregator = "graph";  // "graph" | "fedavg"
  bool disable_transformer = false;
  bool disable_joint_embedding = false;
  bool symmetrize_graph = false;
  bool use_positional = false;
  std::size_t batch_size = 256;
  std::size_t train_negatives = 4;
  std::size_t eval_negatives = 99;
  std::size_t eval_every = 1;
  std::size_t workers = 1;
  uint64_t seed = 42;

  void validate() const;
};

struct RoundMetrics {
  std::size_t round = 0;
  double loss = 0.0;
  double hr10 = 0.0;    // percent
  double ndcg10 = 0.0;  // percent
  bool graph_rebuilt = false;
  std::size_t upload_floats = 0;
};

struct GraphDumpRow {
  std::size_t round = 0;
  uint32_t user_i = 0;
  uint32_t user_j = 0;
  double similarity = 0.0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rounds;
  std::size_t graph_builds = 0;
  std::vector<GraphDumpRow> graph_dump;
};

// 1-based rank of scores[positive_index] under descending score order with
// ties broken by lower item id.
std::size_t rank_with_ties(const std::vector<double>& scores,
                           const std::vector<uint32_t>& ids,
                           std::size_t positive_index);
double ndcg_at_k(std::size_t rank, std::size_t k);

// Drives T communication rounds: broadcast, parallel local training, upload
// (with optional DP noise), graph (re)build on the lite schedule,
// aggregation, and per-round evaluation. All client-side randomness comes
// from streams derived as (seed, salt, client, round), so results do not
// depend on worker scheduling.
class Orchestrator {
 public:
  Orchestrator(const InteractionDataset& ds, EmbeddingTable& embeddings,
               const FederationConfig& cfg, bool collect_graph_dump = false);

  ExperimentResult run();
  // (HR@K, NDCG@K) over all users, in percent.
  std::pair<double, double> evaluate(std::size_t k = 10) const;

  const std::vector<ClientModelParams>& clients() const { return clients_; }
  const InteractionDataset& dataset() const { return ds_; }

 private:
  void run_round(std::size_t round, ExperimentResult& result);

  const InteractionDataset& ds_;
  EmbeddingTable& emb_;
  FederationConfig cfg_;
  bool collect_graph_dump_;
  std::vector<ClientModelParams> clients_;
  std::vector<EvalCandidates> candidates_;
  GlobalEmbedding broadcast_;
  UserGraph graph_;
  bool graph_ready_ = false;
};

ExperimentResult run_experiment(const InteractionDataset& ds,
                                EmbeddingTable& embeddings,
                                const FederationConfig& cfg);

struct VariantResult {
  std::string name;
  ExperimentResult result;
};

// Variants: full, nT (no transformer), nJ (no joint embedding), nB (both
// removed), fedavg (mean aggregation, no graph). Every variant runs with the
// same seed and dataset.
std::vector<VariantResult> run_ablation(const InteractionDataset& ds,
                                        EmbeddingTable& embeddings,
                                        const FederationConfig& base,
                                        const std::vector<std::string>& variants);

FederationConfig apply_variant(const FederationConfig& base,
                               const std::string& variant);

}  // namespace ufg
