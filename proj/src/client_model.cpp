#include "client_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "layers.hpp"

namespace ufg {

void ModelConfig::validate() const {
  if (d < 4 || d % 4 != 0)
    throw_config("embedding dim must be a positive multiple of 4, got " +
                 std::to_string(d));
  if (heads == 0 || d % heads != 0)
    throw_config("embedding dim " + std::to_string(d) +
                 " not divisible by head count " + std::to_string(heads));
  if (!disable_joint_embedding && d1 == 0)
    throw_config("text dimension d1 must be positive");
  if (seq_len == 0) throw_config("sequence cap must be positive");
  if (ffn_dim == 0) throw_config("ffn dim must be positive");
  if (num_items == 0) throw_config("model needs at least one item");
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double std = std::sqrt(2.0 / double(rows + cols));
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.next_normal(0.0, std);
  return m;
}

// He init for layers whose output feeds a ReLU.
Matrix he(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double std = std::sqrt(2.0 / double(rows));
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.next_normal(0.0, std);
  return m;
}

Matrix small_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.next_normal(0.0, 0.01);
  return m;
}

}  // namespace

ClientModelParams ClientModelParams::init(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ClientModelParams p;
  p.cfg = cfg;
  const std::size_t d = cfg.d;

  if (cfg.disable_joint_embedding) {
    p.user_vec = small_normal(1, d, rng);
  } else {
    // The text vector is L2-normalized (per-coordinate variance ~ 1/d1),
    // so fan-in scaling must not divide by d1 again or e_u collapses to
    // ~1/sqrt(d1) scale and the scorer sees no gradient.
    p.joint_w = Matrix(cfg.d1, d);
    const double std = std::sqrt(2.0 / (1.0 + double(d) / double(cfg.d1)));
    for (std::size_t i = 0; i < p.joint_w.size(); ++i)
      p.joint_w.data()[i] = rng.next_normal(0.0, std);
    p.joint_b = Matrix(1, d);
  }
  p.item_table = Matrix(cfg.num_items + 1, d);
  if (!cfg.disable_transformer) {
    p.wq = glorot(d, d, rng);
    p.wk = glorot(d, d, rng);
    p.wv = glorot(d, d, rng);
    p.wo = glorot(d, d, rng);
    p.ffn_w1 = he(d, cfg.ffn_dim, rng);
    p.ffn_b1 = Matrix(1, cfg.ffn_dim);
    p.ffn_w2 = glorot(cfg.ffn_dim, d, rng);
    p.ffn_b2 = Matrix(1, d);
    if (cfg.use_positional) p.pos_table = small_normal(cfg.seq_len, d, rng);
  }
  p.umlp_w1 = he(d, 2 * d, rng);
  p.umlp_b1 = Matrix(1, 2 * d);
  p.umlp_w2 = glorot(2 * d, d, rng);
  p.umlp_b2 = Matrix(1, d);
  p.score_w1 = he(d, d / 2, rng);
  p.score_b1 = Matrix(1, d / 2);
  p.score_w2 = he(d / 2, d / 4, rng);
  p.score_b2 = Matrix(1, d / 4);
  p.score_w3 = glorot(d / 4, 1, rng);
  p.score_b3 = Matrix(1, 1);
  return p;
}

ClientModelParams ClientModelParams::zeros_like() const {
  ClientModelParams g = *this;
  g.for_each_tensor([](const char*, Matrix& m) { m.fill(0.0); });
  return g;
}

std::size_t ClientModelParams::param_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const char*, const Matrix& m) { n += m.size(); });
  return n;
}

bool ClientModelParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&](const char*, const Matrix& m) { ok = ok && m.all_finite(); });
  return ok;
}

Matrix joint_embed(const std::vector<double>& v_u,
                   const ClientModelParams& params) {
  if (params.cfg.disable_joint_embedding) return params.user_vec;
  if (v_u.size() != params.joint_w.rows())
    throw_dim("joint_embed: text vector length " + std::to_string(v_u.size()) +
              " vs weight " + params.joint_w.shape_str());
  Matrix x(1, v_u.size());
  for (std::size_t i = 0; i < v_u.size(); ++i) x(0, i) = v_u[i];
  return linear_forward(x, params.joint_w, params.joint_b);
}

std::vector<uint32_t> pad_sequence(const std::vector<uint32_t>& items,
                                   std::size_t seq_len) {
  std::vector<uint32_t> out(seq_len, 0);
  const std::size_t n = std::min(items.size(), seq_len);
  for (std::size_t i = 0; i < n; ++i)
    out[seq_len - n + i] = items[items.size() - n + i];
  return out;
}

TransformerCache transformer_forward(const ClientModelParams& params,
                                     const std::vector<uint32_t>& seq) {
  const ModelConfig& cfg = params.cfg;
  const std::size_t d = cfg.d;
  TransformerCache c;
  c.ids = seq;
  c.seq_rep = Matrix(1, d);
  if (seq.size() > cfg.seq_len)
    throw_dim("sequence length " + std::to_string(seq.size()) +
              " exceeds cap " + std::to_string(cfg.seq_len));
  const std::size_t n = seq.size();
  for (uint32_t id : seq) {
    if (id > cfg.num_items)
      throw_data("sequence item id " + std::to_string(id) + " out of range");
    if (id != 0) ++c.nvalid;
  }
  if (c.nvalid == 0) return c;  // degenerate contract: zero vector

  c.x = Matrix(n, d);
  for (std::size_t t = 0; t < n; ++t) {
    if (seq[t] == 0) continue;
    const double* src = params.item_table.row(seq[t]);
    double* dst = c.x.row(t);
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
    if (cfg.use_positional)
      for (std::size_t j = 0; j < d; ++j) dst[j] += params.pos_table(t, j);
  }

  c.q = matmul(c.x, params.wq);
  c.k = matmul(c.x, params.wk);
  c.v = matmul(c.x, params.wv);

  const std::size_t heads = cfg.heads;
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));
  const double neg_inf = -std::numeric_limits<double>::infinity();
  c.z = Matrix(n, d);
  c.attn.resize(heads);
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const std::size_t off = hd * dh;
    Matrix scores(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (seq[j] == 0) {
          scores(i, j) = neg_inf;  // padded keys carry no attention mass
          continue;
        }
        double dot = 0.0;
        for (std::size_t f = 0; f < dh; ++f)
          dot += c.q(i, off + f) * c.k(j, off + f);
        scores(i, j) = dot * scale;
      }
    }
    Matrix probs = softmax_rows(scores);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t f = 0; f < dh; ++f) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          acc += probs(i, j) * c.v(j, off + f);
        c.z(i, off + f) = acc;
      }
    c.attn[hd] = std::move(probs);
  }

  c.o = matmul(c.z, params.wo);
  c.h = add(c.x, c.o);
  c.a1 = linear_forward(c.h, params.ffn_w1, params.ffn_b1);
  c.r1 = relu_forward(c.a1);
  c.f = linear_forward(c.r1, params.ffn_w2, params.ffn_b2);
  c.y = add(c.h, c.f);

  for (std::size_t t = 0; t < n; ++t) {
    if (seq[t] == 0) continue;
    for (std::size_t j = 0; j < d; ++j)
      c.seq_rep(0, j) += c.y(t, j) / double(c.nvalid);
  }
  return c;
}

void transformer_backward(const ClientModelParams& params,
                          const TransformerCache& c, const Matrix& g_seq,
                          ClientModelParams& grads) {
  if (c.nvalid == 0) return;
  const ModelConfig& cfg = params.cfg;
  const std::size_t d = cfg.d;
  const std::size_t n = c.ids.size();

  Matrix gy(n, d);
  for (std::size_t t = 0; t < n; ++t) {
    if (c.ids[t] == 0) continue;
    for (std::size_t j = 0; j < d; ++j)
      gy(t, j) = g_seq(0, j) / double(c.nvalid);
  }

  // y = h + f, f = relu(h w1 + b1) w2 + b2
  Matrix gh = gy;
  LinearGrad l2 = linear_backward(c.r1, params.ffn_w2, gy);
  add_inplace(grads.ffn_w2, l2.dw);
  add_inplace(grads.ffn_b2, l2.db);
  Matrix ga1 = relu_backward(c.a1, l2.dx);
  LinearGrad l1 = linear_backward(c.h, params.ffn_w1, ga1);
  add_inplace(grads.ffn_w1, l1.dw);
  add_inplace(grads.ffn_b1, l1.db);
  add_inplace(gh, l1.dx);

  // h = x + z wo
  Matrix gx = gh;
  add_inplace(grads.wo, matmul(transpose(c.z), gh));
  Matrix gz = matmul(gh, transpose(params.wo));

  const std::size_t heads = cfg.heads;
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));
  Matrix gq(n, d), gk(n, d), gv(n, d);
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const std::size_t off = hd * dh;
    const Matrix& probs = c.attn[hd];
    // gP = gZ_h V_h^T ; gV_h = P^T gZ_h
    Matrix gp(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t f = 0; f < dh; ++f)
          acc += gz(i, off + f) * c.v(j, off + f);
        gp(i, j) = acc;
      }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t f = 0; f < dh; ++f) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          acc += probs(i, j) * gz(i, off + f);
        gv(j, off + f) = acc;
      }
    // softmax rows: gS = P ⊙ (gP - rowsum(gP ⊙ P))
    Matrix gs(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += gp(i, j) * probs(i, j);
      for (std::size_t j = 0; j < n; ++j)
        gs(i, j) = probs(i, j) * (gp(i, j) - dot);
    }
    // scores = scale * Q_h K_h^T
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t f = 0; f < dh; ++f) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += gs(i, j) * c.k(j, off + f);
        gq(i, off + f) = acc * scale;
      }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t f = 0; f < dh; ++f) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += gs(i, j) * c.q(i, off + f);
        gk(j, off + f) = acc * scale;
      }
  }

  add_inplace(grads.wq, matmul(transpose(c.x), gq));
  add_inplace(grads.wk, matmul(transpose(c.x), gk));
  add_inplace(grads.wv, matmul(transpose(c.x), gv));
  add_inplace(gx, matmul(gq, transpose(params.wq)));
  add_inplace(gx, matmul(gk, transpose(params.wk)));
  add_inplace(gx, matmul(gv, transpose(params.wv)));

  for (std::size_t t = 0; t < n; ++t) {
    if (c.ids[t] == 0) continue;
    double* irow = grads.item_table.row(c.ids[t]);
    for (std::size_t j = 0; j < d; ++j) irow[j] += gx(t, j);
    if (cfg.use_positional) {
      double* prow = grads.pos_table.row(t);
      for (std::size_t j = 0; j < d; ++j) prow[j] += gx(t, j);
    }
  }
}

UserRepCache user_representation(const ClientModelParams& params,
                                 const std::vector<double>& v_u,
                                 const std::vector<uint32_t>& seq) {
  UserRepCache c;
  c.e_u = joint_embed(v_u, params);
  if (params.cfg.disable_transformer) {
    c.tf.seq_rep = Matrix(1, params.cfg.d);  // nT: contribution exactly zero
  } else {
    c.tf = transformer_forward(params, seq);
  }
  c.sum_in = add(c.e_u, c.tf.seq_rep);
  c.u_a1 = linear_forward(c.sum_in, params.umlp_w1, params.umlp_b1);
  c.u_r1 = relu_forward(c.u_a1);
  c.u_rep = linear_forward(c.u_r1, params.umlp_w2, params.umlp_b2);
  return c;
}

void user_representation_backward(const ClientModelParams& params,
                                  const UserRepCache& c,
                                  const std::vector<double>& v_u,
                                  const Matrix& g_urep,
                                  ClientModelParams& grads) {
  LinearGrad l2 = linear_backward(c.u_r1, params.umlp_w2, g_urep);
  add_inplace(grads.umlp_w2, l2.dw);
  add_inplace(grads.umlp_b2, l2.db);
  Matrix ga1 = relu_backward(c.u_a1, l2.dx);
  LinearGrad l1 = linear_backward(c.sum_in, params.umlp_w1, ga1);
  add_inplace(grads.umlp_w1, l1.dw);
  add_inplace(grads.umlp_b1, l1.db);
  const Matrix& g_sum = l1.dx;  // flows to both e_u and seq_rep

  if (params.cfg.disable_joint_embedding) {
    add_inplace(grads.user_vec, g_sum);
  } else {
    for (std::size_t i = 0; i < v_u.size(); ++i)
      for (std::size_t j = 0; j < params.cfg.d; ++j)
        grads.joint_w(i, j) += v_u[i] * g_sum(0, j);
    add_inplace(grads.joint_b, g_sum);
  }
  if (!params.cfg.disable_transformer)
    transformer_backward(params, c.tf, g_sum, grads);
}

double predict_logit(const ClientModelParams& params, const Matrix& u_rep,
                     uint32_t item, ScoreCache* cache) {
  if (item == 0 || item > params.cfg.num_items)
    throw Error(ErrorCode::InvalidArg,
                "candidate item id " + std::to_string(item) +
                    " out of range [1, " + std::to_string(params.cfg.num_items) +
                    "]");
  const std::size_t d = params.cfg.d;
  Matrix x0(1, d);
  const double* irow = params.item_table.row(item);
  for (std::size_t j = 0; j < d; ++j) x0(0, j) = u_rep(0, j) * irow[j];
  Matrix a1 = linear_forward(x0, params.score_w1, params.score_b1);
  Matrix r1 = relu_forward(a1);
  Matrix a2 = linear_forward(r1, params.score_w2, params.score_b2);
  Matrix r2 = relu_forward(a2);
  Matrix out = linear_forward(r2, params.score_w3, params.score_b3);
  if (cache) {
    cache->item = item;
    cache->x0 = std::move(x0);
    cache->s_a1 = std::move(a1);
    cache->s_r1 = std::move(r1);
    cache->s_a2 = std::move(a2);
    cache->s_r2 = std::move(r2);
    cache->logit = out(0, 0);
  }
  return out(0, 0);
}

double predict(const ClientModelParams& params, const Matrix& u_rep,
               uint32_t item) {
  return sigmoid(predict_logit(params, u_rep, item));
}

Matrix score_backward(const ClientModelParams& params, const ScoreCache& c,
                      const Matrix& u_rep, double g_logit,
                      ClientModelParams& grads) {
  Matrix g(1, 1);
  g(0, 0) = g_logit;
  LinearGrad l3 = linear_backward(c.s_r2, params.score_w3, g);
  add_inplace(grads.score_w3, l3.dw);
  add_inplace(grads.score_b3, l3.db);
  Matrix ga2 = relu_backward(c.s_a2, l3.dx);
  LinearGrad l2 = linear_backward(c.s_r1, params.score_w2, ga2);
  add_inplace(grads.score_w2, l2.dw);
  add_inplace(grads.score_b2, l2.db);
  Matrix ga1 = relu_backward(c.s_a1, l2.dx);
  LinearGrad l1 = linear_backward(c.x0, params.score_w1, ga1);
  add_inplace(grads.score_w1, l1.dw);
  add_inplace(grads.score_b1, l1.db);

  // x0 = u_rep ⊙ item row: split the gradient between the two factors.
  const std::size_t d = params.cfg.d;
  const double* irow = params.item_table.row(c.item);
  double* girow = grads.item_table.row(c.item);
  Matrix g_urep(1, d);
  for (std::size_t j = 0; j < d; ++j) {
    girow[j] += l1.dx(0, j) * u_rep(0, j);
    g_urep(0, j) = l1.dx(0, j) * irow[j];
  }
  return g_urep;
}

double reg_term(const Matrix& e_global_rows, const Matrix& local_rows) {
  if (e_global_rows.rows() != local_rows.rows() ||
      e_global_rows.cols() != local_rows.cols())
    throw_dim("reg_term: " + e_global_rows.shape_str() + " vs " +
              local_rows.shape_str());
  double acc = 0.0;
  for (std::size_t i = 0; i < e_global_rows.size(); ++i) {
    const double diff = e_global_rows.data()[i] - local_rows.data()[i];
    acc += diff * diff;
  }
  return acc / double(e_global_rows.size());
}

namespace {

double loss_impl(const TrainingBatch& batch, const ClientModelParams& params,
                 const std::vector<double>& v_u, const Matrix& e_global,
                 double lambda, ClientModelParams* grads) {
  if (batch.candidates.size() != batch.labels.size())
    throw_dim("batch candidates/labels size mismatch");
  if (batch.candidates.empty()) throw_data("empty training batch");
  const std::size_t bsz = batch.candidates.size();
  const std::size_t d = params.cfg.d;

  UserRepCache urc = user_representation(params, v_u, batch.seq);
  Matrix g_urep(1, d);
  double bce_sum = 0.0;
  for (std::size_t i = 0; i < bsz; ++i) {
    ScoreCache sc;
    const double logit = predict_logit(params, urc.u_rep, batch.candidates[i], &sc);
    bce_sum += bce_loss_from_logit(batch.labels[i], logit);
    if (grads) {
      const double g_logit = (sigmoid(logit) - batch.labels[i]) / double(bsz);
      Matrix gi = score_backward(params, sc, urc.u_rep, g_logit, *grads);
      add_inplace(g_urep, gi);
    }
  }
  if (grads) user_representation_backward(params, urc, v_u, g_urep, *grads);

  double loss = bce_sum / double(bsz);
  if (lambda > 0.0 && !batch.reg_items.empty()) {
    const double denom = double(batch.reg_items.size()) * double(d);
    double reg = 0.0;
    for (uint32_t item : batch.reg_items) {
      const double* lrow = params.item_table.row(item);
      const double* grow = e_global.row(item);
      double* girow = grads ? grads->item_table.row(item) : nullptr;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = grow[j] - lrow[j];
        reg += diff * diff;
        if (girow) girow[j] += lambda * 2.0 * (lrow[j] - grow[j]) / denom;
      }
    }
    loss += lambda * reg / denom;
  }
  if (grads) grads->item_table.zero_row(0);
  return loss;
}

}  // namespace

double total_loss(const TrainingBatch& batch, const ClientModelParams& params,
                  const std::vector<double>& v_u, const Matrix& e_global,
                  double lambda) {
  return loss_impl(batch, params, v_u, e_global, lambda, nullptr);
}

double total_loss_and_grad(const TrainingBatch& batch,
                           const ClientModelParams& params,
                           const std::vector<double>& v_u,
                           const Matrix& e_global, double lambda,
                           ClientModelParams& grads) {
  return loss_impl(batch, params, v_u, e_global, lambda, &grads);
}

namespace {

void sgd_step(ClientModelParams& params, const ClientModelParams& grads,
              double lr) {
  std::vector<Matrix*> pv;
  params.for_each_tensor([&](const char*, Matrix& m) { pv.push_back(&m); });
  std::vector<const Matrix*> gv;
  grads.for_each_tensor([&](const char*, const Matrix& m) { gv.push_back(&m); });
  for (std::size_t i = 0; i < pv.size(); ++i)
    axpy_inplace(*pv[i], -lr, *gv[i]);
  params.item_table.zero_row(0);
}

}  // namespace

TrainStats local_train(ClientModelParams& params,
                       const std::vector<double>& v_u,
                       const InteractionDataset& ds, std::size_t user,
                       const Matrix& e_global, const TrainConfig& cfg,
                       Rng& rng) {
  if (cfg.lr < 0.0) throw_config("learning rate must be >= 0");
  if (cfg.epochs == 0) throw_config("local epochs must be >= 1");
  if (cfg.batch_size == 0) throw_config("batch size must be >= 1");

  const auto& positives = ds.train[user];
  const std::vector<uint32_t> seq = pad_sequence(positives, params.cfg.seq_len);

  TrainStats stats;
  double loss_sum = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    struct Sample {
      uint32_t item;
      double label;
      bool negative;
    };
    std::vector<Sample> samples;
    samples.reserve(positives.size() * (1 + cfg.negatives_per_pos));
    for (uint32_t pos : positives) {
      samples.push_back({pos, 1.0, false});
      if (cfg.negatives_per_pos > 0) {
        const auto negs =
            sample_train_negatives(ds, user, cfg.negatives_per_pos, rng);
        for (uint32_t n : negs) samples.push_back({n, 0.0, true});
      }
    }
    // Fisher-Yates with the caller's stream keeps runs reproducible.
    for (std::size_t i = samples.size(); i > 1; --i)
      std::swap(samples[i - 1], samples[rng.next_below(i)]);

    for (std::size_t start = 0; start < samples.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(samples.size(), start + cfg.batch_size);
      TrainingBatch batch;
      batch.seq = seq;
      for (std::size_t i = start; i < end; ++i) {
        batch.candidates.push_back(samples[i].item);
        batch.labels.push_back(samples[i].label);
        if (samples[i].negative) batch.reg_items.push_back(samples[i].item);
      }
      ClientModelParams grads = params.zeros_like();
      const double loss =
          total_loss_and_grad(batch, params, v_u, e_global, cfg.lambda, grads);
      if (!std::isfinite(loss) || !grads.all_finite())
        throw_runtime("non-finite loss/gradient for user " +
                      std::to_string(ds.user_ids[user]) + " at epoch " +
                      std::to_string(epoch + 1) + ", batch offset " +
                      std::to_string(start));
      sgd_step(params, grads, cfg.lr);
      loss_sum += loss * double(end - start);
      stats.samples += end - start;
    }
  }
  if (stats.samples > 0) stats.mean_loss = loss_sum / double(stats.samples);
  return stats;
}

UploadPacket prepare_upload(const ClientModelParams& params,
                            std::size_t client_id, double alpha, Rng& rng) {
  if (alpha < 0.0) throw_config("dp noise intensity must be >= 0");
  UploadPacket pkt;
  pkt.client_id = client_id;
  pkt.graph_weights = params.graph_weights();
  pkt.item_table = params.item_table;
  if (alpha > 0.0) {
    for (std::size_t i = 0; i < pkt.graph_weights.size(); ++i)
      pkt.graph_weights.data()[i] += rng.next_laplace(alpha);
    for (std::size_t i = 0; i < pkt.item_table.size(); ++i)
      pkt.item_table.data()[i] += rng.next_laplace(alpha);
  }
  return pkt;
}

}  // namespace ufg
