#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace ufg {

// Shape and ablation switches shared by every client in an experiment.
// umlp is d -> 2d -> d and the scorer is d -> d/2 -> d/4 -> 1, so d must be
// divisible by 4 (and by the head count).
struct ModelConfig {
  std::size_t d = 32;
  std::size_t d1 = 100;
  std::size_t seq_len = 50;
  std::size_t heads = 2;
  std::size_t ffn_dim = 64;
  std::size_t num_items = 0;
  bool disable_transformer = false;    // nT ablation
  bool disable_joint_embedding = false;  // nJ ablation
  bool use_positional = false;

  void validate() const;
};

// All trainable tensors of one client. Which tensors are live depends on the
// ablation flags; for_each_tensor only visits live ones. Row 0 of item_table
// is the padding row and stays exactly zero.
struct ClientModelParams {
  ModelConfig cfg;

  Matrix joint_w, joint_b;  // d1 x d, 1 x d
  Matrix user_vec;          // 1 x d, replaces the joint layer under nJ
  Matrix item_table;        // (num_items+1) x d
  Matrix wq, wk, wv, wo;    // d x d
  Matrix ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Matrix pos_table;  // seq_len x d, only when use_positional
  Matrix umlp_w1, umlp_b1, umlp_w2, umlp_b2;
  Matrix score_w1, score_b1, score_w2, score_b2, score_w3, score_b3;

  static ClientModelParams init(const ModelConfig& cfg, Rng& rng);
  ClientModelParams zeros_like() const;

  template <typename F>
  void for_each_tensor(F&& f);
  template <typename F>
  void for_each_tensor(F&& f) const;

  std::size_t param_count() const;
  bool all_finite() const;
  // Tensor whose flattening drives the server-side user graph: joint_w
  // normally, the free user vector under nJ.
  const Matrix& graph_weights() const {
    return cfg.disable_joint_embedding ? user_vec : joint_w;
  }
};

// e_u = v_u * W + b (1 x d).
Matrix joint_embed(const std::vector<double>& v_u,
                   const ClientModelParams& params);

struct TransformerCache {
  std::vector<uint32_t> ids;  // padded window, length seq_len
  std::size_t nvalid = 0;
  Matrix x, q, k, v;
  std::vector<Matrix> attn;  // per-head softmax probabilities
  Matrix z, o, h, a1, r1, f, y;
  Matrix seq_rep;  // 1 x d mean over non-padded positions
};

// Multi-head self-attention + FFN block over the (truncated, left-padded)
// item-id sequence. Padded positions are masked out of the keys and of the
// mean pooling; an all-padding sequence yields a zero vector.
TransformerCache transformer_forward(const ClientModelParams& params,
                                     const std::vector<uint32_t>& seq);
// Accumulates parameter gradients (and item/positional row gradients) for
// upstream gradient g_seq (1 x d) into grads.
void transformer_backward(const ClientModelParams& params,
                          const TransformerCache& cache, const Matrix& g_seq,
                          ClientModelParams& grads);

struct UserRepCache {
  Matrix e_u;        // 1 x d
  Matrix sum_in;     // e_u + seq_rep
  Matrix u_a1, u_r1; // umlp hidden pre/post ReLU
  Matrix u_rep;      // 1 x d
  TransformerCache tf;
};

UserRepCache user_representation(const ClientModelParams& params,
                                 const std::vector<double>& v_u,
                                 const std::vector<uint32_t>& seq);
void user_representation_backward(const ClientModelParams& params,
                                  const UserRepCache& cache,
                                  const std::vector<double>& v_u,
                                  const Matrix& g_urep,
                                  ClientModelParams& grads);

struct ScoreCache {
  uint32_t item = 0;
  Matrix x0;          // u_rep ⊙ item embedding
  Matrix s_a1, s_r1;  // 1 x d/2
  Matrix s_a2, s_r2;  // 1 x d/4
  double logit = 0.0;
};

double predict_logit(const ClientModelParams& params, const Matrix& u_rep,
                     uint32_t item, ScoreCache* cache = nullptr);
// sigmoid(logit); strictly inside (0,1) for finite parameters.
double predict(const ClientModelParams& params, const Matrix& u_rep,
               uint32_t item);
// Returns the gradient w.r.t. u_rep for this candidate (1 x d) and
// accumulates scorer/item gradients into grads.
Matrix score_backward(const ClientModelParams& params, const ScoreCache& cache,
                      const Matrix& u_rep, double g_logit,
                      ClientModelParams& grads);

// Mean over all entries of (a - b)^2; shapes must match.
double reg_term(const Matrix& e_global_rows, const Matrix& local_rows);

struct TrainingBatch {
  std::vector<uint32_t> seq;         // already truncated + left-padded
  std::vector<uint32_t> candidates;  // item ids, never 0
  std::vector<double> labels;        // 1 observed, 0 sampled negative
  std::vector<uint32_t> reg_items;   // the sampled negatives of this batch
};

// L_all = mean BCE over candidates + lambda * reg over reg_items, where the
// regularizer compares local item rows against the broadcast global table.
double total_loss(const TrainingBatch& batch, const ClientModelParams& params,
                  const std::vector<double>& v_u, const Matrix& e_global,
                  double lambda);
double total_loss_and_grad(const TrainingBatch& batch,
                           const ClientModelParams& params,
                           const std::vector<double>& v_u,
                           const Matrix& e_global, double lambda,
                           ClientModelParams& grads);

struct TrainConfig {
  double lr = 0.01;
  double lambda = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 256;
  std::size_t negatives_per_pos = 4;
};

struct TrainStats {
  double mean_loss = 0.0;
  std::size_t samples = 0;
};

// E epochs of mini-batch SGD on this client's sequence. The caller is
// responsible for initializing item_table from the broadcast global table
// beforehand; the padding row is re-zeroed after every step.
TrainStats local_train(ClientModelParams& params,
                       const std::vector<double>& v_u,
                       const InteractionDataset& ds, std::size_t user,
                       const Matrix& e_global, const TrainConfig& cfg,
                       Rng& rng);

struct UploadPacket {
  std::size_t client_id = 0;
  Matrix graph_weights;  // joint_w (or user_vec under nJ), possibly noised
  Matrix item_table;     // possibly noised
};

// alpha == 0 copies the tensors exactly; alpha > 0 adds i.i.d. Laplace(0,
// alpha) noise elementwise to the uploaded copies. Local params are never
// touched.
UploadPacket prepare_upload(const ClientModelParams& params,
                            std::size_t client_id, double alpha, Rng& rng);

// Truncates to the most recent seq_len items and left-pads with id 0.
std::vector<uint32_t> pad_sequence(const std::vector<uint32_t>& items,
                                   std::size_t seq_len);

template <typename F>
void ClientModelParams::for_each_tensor(F&& f) {
  if (cfg.disable_joint_embedding) {
    f("user_vec", user_vec);
  } else {
    f("joint_w", joint_w);
    f("joint_b", joint_b);
  }
  f("item_table", item_table);
  if (!cfg.disable_transformer) {
    f("wq", wq);
    f("wk", wk);
    f("wv", wv);
    f("wo", wo);
    f("ffn_w1", ffn_w1);
    f("ffn_b1", ffn_b1);
    f("ffn_w2", ffn_w2);
    f("ffn_b2", ffn_b2);
    if (cfg.use_positional) f("pos_table", pos_table);
  }
  f("umlp_w1", umlp_w1);
  f("umlp_b1", umlp_b1);
  f("umlp_w2", umlp_w2);
  f("umlp_b2", umlp_b2);
  f("score_w1", score_w1);
  f("score_b1", score_b1);
  f("score_w2", score_w2);
  f("score_b2", score_b2);
  f("score_w3", score_w3);
  f("score_b3", score_b3);
}

template <typename F>
void ClientModelParams::for_each_tensor(F&& f) const {
  const_cast<ClientModelParams*>(this)->for_each_tensor(
      [&](const char* name, Matrix& m) { f(name, const_cast<const Matrix&>(m)); });
}

}  // namespace ufg
