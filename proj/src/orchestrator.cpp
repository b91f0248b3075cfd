#include "orchestrator.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "error.hpp"
#include "log.hpp"

namespace ufg {

namespace {

enum : uint64_t {
  kSaltGlobalInit = 0xA1,
  kSaltClientInit = 0xA2,
  kSaltEval = 0xA3,
  kSaltTrain = 0xA4,
  kSaltDp = 0xA5,
};

// Runs fn(0..n-1) on up to `workers` threads. Each index writes only its own
// output slot, so the result is identical for any worker count.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nthreads = std::min(workers, n);
  std::vector<std::exception_ptr> errors(nthreads);
  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    threads.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += nthreads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void FederationConfig::validate() const {
  if (rounds == 0) throw_config("rounds must be >= 1");
  if (local_epochs == 0) throw_config("local_epochs must be >= 1");
  if (lite_interval == 0) throw_config("lite_interval must be >= 1");
  if (lr <= 0.0) throw_config("learning_rate must be > 0");
  if (lambda < 0.0) throw_config("lambda must be >= 0");
  if (dp_alpha < 0.0) throw_config("dp_alpha must be >= 0");
  if (top_k == 0) throw_config("top_k must be >= 1");
  if (batch_size == 0) throw_config("batch_size must be >= 1");
  if (eval_every == 0) throw_config("eval_every must be >= 1");
  if (workers == 0) throw_config("workers must be >= 1");
  if (eval_negatives == 0) throw_config("eval_negatives must be >= 1");
  if (aggregator != "graph" && aggregator != "fedavg")
    throw_config("aggregator must be 'graph' or 'fedavg', got '" + aggregator +
                 "'");
}

std::size_t rank_with_ties(const std::vector<double>& scores,
                           const std::vector<uint32_t>& ids,
                           std::size_t positive_index) {
  if (scores.size() != ids.size() || positive_index >= scores.size())
    throw_dim("rank_with_ties: inconsistent candidate arrays");
  const double ps = scores[positive_index];
  const uint32_t pid = ids[positive_index];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == positive_index) continue;
    if (scores[i] > ps || (scores[i] == ps && ids[i] < pid)) ++rank;
  }
  return rank;
}

double ndcg_at_k(std::size_t rank, std::size_t k) {
  if (rank > k) return 0.0;
  return 1.0 / std::log2(double(rank) + 1.0);
}

Orchestrator::Orchestrator(const InteractionDataset& ds,
                           EmbeddingTable& embeddings,
                           const FederationConfig& cfg, bool collect_graph_dump)
    : ds_(ds), emb_(embeddings), cfg_(cfg),
      collect_graph_dump_(collect_graph_dump) {
  cfg_.validate();
  if (ds_.num_users == 0) throw_data("experiment needs at least one user");
  emb_.sync(ds_);

  ModelConfig mc;
  mc.d = cfg_.embedding_dim;
  mc.d1 = emb_.d1();
  mc.seq_len = cfg_.seq_len;
  mc.heads = cfg_.heads;
  mc.ffn_dim = cfg_.ffn_dim;
  mc.num_items = ds_.num_items;
  mc.disable_transformer = cfg_.disable_transformer;
  mc.disable_joint_embedding = cfg_.disable_joint_embedding;
  mc.use_positional = cfg_.use_positional;
  mc.validate();

  clients_.reserve(ds_.num_users);
  for (std::size_t i = 0; i < ds_.num_users; ++i) {
    Rng rng = Rng::derive(cfg_.seed, kSaltClientInit, i);
    clients_.push_back(ClientModelParams::init(mc, rng));
  }

  candidates_.reserve(ds_.num_users);
  for (std::size_t u = 0; u < ds_.num_users; ++u) {
    Rng rng = Rng::derive(cfg_.seed, kSaltEval, u);
    candidates_.push_back(
        build_eval_candidates(ds_, u, rng, cfg_.eval_negatives));
  }

  // Round-1 broadcast: one shared random table so first-round divergence
  // comes only from local data.
  Rng grng = Rng::derive(cfg_.seed, kSaltGlobalInit);
  Matrix table(ds_.num_items + 1, cfg_.embedding_dim);
  for (std::size_t i = 0; i < table.size(); ++i)
    table.data()[i] = grng.next_normal(0.0, 0.01);
  table.zero_row(0);
  broadcast_.mode = ReduceMode::Mean;
  broadcast_.round = 0;
  broadcast_.mean = std::move(table);
}

void Orchestrator::run_round(std::size_t round, ExperimentResult& result) {
  const std::size_t n = ds_.num_users;
  std::vector<UploadPacket> packets(n);
  std::vector<TrainStats> stats(n);

  TrainConfig tc;
  tc.lr = cfg_.lr;
  tc.lambda = cfg_.lambda;
  tc.epochs = cfg_.local_epochs;
  tc.batch_size = cfg_.batch_size;
  tc.negatives_per_pos = cfg_.train_negatives;

  parallel_for(n, cfg_.workers, [&](std::size_t i) {
    ClientModelParams& params = clients_[i];
    const Matrix& global = broadcast_.for_client(i);
    params.item_table = global;
    params.item_table.zero_row(0);
    Rng train_rng = Rng::derive(cfg_.seed, kSaltTrain, i, round);
    try {
      stats[i] = local_train(params, emb_.vec(i), ds_, i, global, tc, train_rng);
    } catch (const Error& e) {
      throw_runtime("round " + std::to_string(round) + ", client " +
                    std::to_string(i) + ": " + e.what());
    }
    Rng dp_rng = Rng::derive(cfg_.seed, kSaltDp, i, round);
    packets[i] = prepare_upload(params, i, cfg_.dp_alpha, dp_rng);
  });

  std::size_t upload_floats = 0;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    upload_floats += packets[i].graph_weights.size() + packets[i].item_table.size();
    loss_sum += stats[i].mean_loss;
  }

  std::vector<const Matrix*> tables(n);
  for (std::size_t i = 0; i < n; ++i) tables[i] = &packets[i].item_table;

  bool rebuilt = false;
  if (cfg_.aggregator == "graph") {
    const bool due = ((round - 1) % cfg_.lite_interval) == 0;
    if (due || !graph_ready_) {
      std::vector<std::vector<double>> vecs(n);
      for (std::size_t i = 0; i < n; ++i) vecs[i] = vectorize_weights(packets[i]);
      SimilarityMatrix sim = similarity_matrix(vecs);
      // top_k cannot exceed n-1; tiny experiments just use what they have.
      const std::size_t k = std::min(cfg_.top_k, n - 1);
      if (k == 0) throw_config("graph aggregation needs at least 2 clients");
      if (k < cfg_.top_k && round == 1)
        UFG_LOG_WARN("top_k %zu capped at %zu (only %zu clients)", cfg_.top_k,
                     k, n);
      graph_ = build_topk_graph(sim, k, cfg_.symmetrize_graph);
      graph_ready_ = true;
      rebuilt = true;
      ++result.graph_builds;
      if (collect_graph_dump_) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            if (i != j && graph_.edge(i, j))
              result.graph_dump.push_back({round, ds_.user_ids[i],
                                           ds_.user_ids[j], sim.values(i, j)});
      }
    }
    std::vector<Matrix> aggregated = gcn_aggregate(graph_, tables);
    broadcast_ = reduce_global(std::move(aggregated), cfg_.reduce_mode);
  } else {
    broadcast_.mode = ReduceMode::Mean;
    broadcast_.per_user.clear();
    broadcast_.mean = fedavg_aggregate(tables);
  }
  broadcast_.round = round;
  if (!broadcast_.for_client(0).all_finite())
    throw_runtime("aggregate produced non-finite values at round " +
                  std::to_string(round));

  RoundMetrics rm;
  rm.round = round;
  rm.loss = loss_sum / double(n);
  rm.graph_rebuilt = rebuilt;
  rm.upload_floats = upload_floats;
  if (round % cfg_.eval_every == 0 || round == cfg_.rounds) {
    const auto [hr, ndcg] = evaluate(10);
    rm.hr10 = hr;
    rm.ndcg10 = ndcg;
    result.rounds.push_back(rm);
  }
  UFG_LOG_INFO("round %zu: loss=%.4f hr10=%.2f ndcg10=%.2f%s", round, rm.loss,
               rm.hr10, rm.ndcg10, rebuilt ? " (graph rebuilt)" : "");
}

ExperimentResult Orchestrator::run() {
  ExperimentResult result;
  for (std::size_t t = 1; t <= cfg_.rounds; ++t) run_round(t, result);
  return result;
}

std::pair<double, double> Orchestrator::evaluate(std::size_t k) const {
  const std::size_t n = ds_.num_users;
  std::vector<double> hr(n, 0.0), ndcg(n, 0.0);
  parallel_for(n, cfg_.workers, [&](std::size_t u) {
    const EvalCandidates& ec = candidates_[u];
    if (ec.negatives.empty())
      throw_runtime("no evaluation candidates for user " +
                    std::to_string(ds_.user_ids[u]));
    const ClientModelParams& params = clients_[u];
    const std::vector<uint32_t> seq =
        pad_sequence(ds_.train[u], params.cfg.seq_len);
    UserRepCache urc = user_representation(params, emb_.vec(u), seq);

    std::vector<uint32_t> ids;
    ids.reserve(1 + ec.negatives.size());
    ids.push_back(ec.positive);
    ids.insert(ids.end(), ec.negatives.begin(), ec.negatives.end());
    std::vector<double> scores(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
      scores[i] = predict_logit(params, urc.u_rep, ids[i]);
    const std::size_t rank = rank_with_ties(scores, ids, 0);
    hr[u] = rank <= k ? 1.0 : 0.0;
    ndcg[u] = ndcg_at_k(rank, k);
  });
  double hsum = 0.0, nsum = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    hsum += hr[u];
    nsum += ndcg[u];
  }
  return {100.0 * hsum / double(n), 100.0 * nsum / double(n)};
}

ExperimentResult run_experiment(const InteractionDataset& ds,
                                EmbeddingTable& embeddings,
                                const FederationConfig& cfg) {
  Orchestrator orch(ds, embeddings, cfg);
  return orch.run();
}

FederationConfig apply_variant(const FederationConfig& base,
                               const std::string& variant) {
  FederationConfig cfg = base;
  if (variant == "full") {
    // as configured
  } else if (variant == "nT") {
    cfg.disable_transformer = true;
  } else if (variant == "nJ") {
    cfg.disable_joint_embedding = true;
  } else if (variant == "nB") {
    cfg.disable_transformer = true;
    cfg.disable_joint_embedding = true;
  } else if (variant == "fedavg") {
    cfg.aggregator = "fedavg";
  } else {
    throw_config("unknown ablation variant '" + variant +
                 "' (expected full, nT, nJ, nB, or fedavg)");
  }
  return cfg;
}

std::vector<VariantResult> run_ablation(
    const InteractionDataset& ds, EmbeddingTable& embeddings,
    const FederationConfig& base, const std::vector<std::string>& variants) {
  if (variants.empty()) throw_config("ablation needs at least one variant");
  std::vector<VariantResult> out;
  out.reserve(variants.size());
  for (const std::string& v : variants) {
    UFG_LOG_INFO("ablation variant %s", v.c_str());
    FederationConfig cfg = apply_variant(base, v);
    out.push_back({v, run_experiment(ds, embeddings, cfg)});
  }
  return out;
}

}  // namespace ufg
