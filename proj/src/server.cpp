#include "server.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "log.hpp"

namespace ufg {

std::vector<double> vectorize_weights(const UploadPacket& packet) {
  const Matrix& w = packet.graph_weights;
  if (w.empty()) throw_dim("vectorize_weights: empty weight matrix");
  return std::vector<double>(w.data(), w.data() + w.size());
}

SimilarityMatrix similarity_matrix(
    const std::vector<std::vector<double>>& vectors) {
  SimilarityMatrix s;
  s.n = vectors.size();
  s.values = Matrix(s.n, s.n);
  std::vector<double> norms(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    if (vectors[i].size() != vectors[0].size())
      throw_dim("similarity_matrix: vector length mismatch at client " +
                std::to_string(i));
    double acc = 0.0;
    for (double v : vectors[i]) acc += v * v;
    norms[i] = std::sqrt(acc);
    if (norms[i] == 0.0) s.degenerate.push_back(i);
  }
  if (!s.degenerate.empty())
    UFG_LOG_WARN("similarity: %zu client(s) uploaded all-zero weights",
                 s.degenerate.size());

  for (std::size_t i = 0; i < s.n; ++i) {
    s.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < s.n; ++j) {
      double sim = 0.0;
      if (norms[i] != 0.0 && norms[j] != 0.0) {
        double dot = 0.0;
        for (std::size_t f = 0; f < vectors[i].size(); ++f)
          dot += vectors[i][f] * vectors[j][f];
        sim = dot / (norms[i] * norms[j]);
        sim = std::clamp(sim, -1.0, 1.0);
      }
      s.values(i, j) = sim;
      s.values(j, i) = sim;
    }
  }
  return s;
}

UserGraph build_topk_graph(const SimilarityMatrix& s, std::size_t k,
                           bool symmetrize) {
  const std::size_t n = s.n;
  if (n == 0) throw_data("build_topk_graph: no clients");
  if (k < 1 || k > n - 1)
    throw Error(ErrorCode::InvalidArg,
                "top-k neighbor budget " + std::to_string(k) +
                    " out of range [1, " + std::to_string(n - 1) + "]");
  UserGraph g;
  g.n = n;
  g.k = k;
  g.adjacency.assign(n * n, 0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.resize(0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = s.values(i, a);
                        const double sb = s.values(i, b);
                        if (sa != sb) return sa > sb;
                        return a < b;  // tie: lower index wins
                      });
    g.adjacency[i * n + i] = 1;
    for (std::size_t t = 0; t < k; ++t) g.adjacency[i * n + order[t]] = 1;
  }

  if (symmetrize) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const uint8_t e =
            g.adjacency[i * n + j] | g.adjacency[j * n + i];
        g.adjacency[i * n + j] = e;
        g.adjacency[j * n + i] = e;
      }
  }

  g.degrees.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t deg = 0;
    for (std::size_t j = 0; j < n; ++j) deg += g.adjacency[i * n + j];
    g.degrees[i] = deg;
  }
  return g;
}

std::vector<Matrix> gcn_aggregate(const UserGraph& graph,
                                  const std::vector<const Matrix*>& tables) {
  const std::size_t n = graph.n;
  if (tables.size() != n)
    throw_dim("gcn_aggregate: " + std::to_string(tables.size()) +
              " tables for " + std::to_string(n) + " graph nodes");
  for (std::size_t i = 1; i < n; ++i)
    if (tables[i]->rows() != tables[0]->rows() ||
        tables[i]->cols() != tables[0]->cols())
      throw_dim("gcn_aggregate: table shape mismatch at client " +
                std::to_string(i) + " (" + tables[i]->shape_str() + " vs " +
                tables[0]->shape_str() + ")");

  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_sqrt_deg[i] = 1.0 / std::sqrt(double(graph.degrees[i]));

  std::vector<Matrix> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix acc(tables[0]->rows(), tables[0]->cols());
    for (std::size_t j = 0; j < n; ++j) {
      if (!graph.edge(i, j)) continue;
      const double w = inv_sqrt_deg[i] * inv_sqrt_deg[j];
      axpy_inplace(acc, w, *tables[j]);
    }
    acc.zero_row(0);  // padding row stays zero even under noisy uploads
    out.push_back(std::move(acc));
  }
  return out;
}

GlobalEmbedding reduce_global(std::vector<Matrix> aggregated,
                              ReduceMode mode) {
  if (aggregated.empty()) throw_data("reduce_global: no aggregated tables");
  GlobalEmbedding g;
  g.mode = mode;
  if (mode == ReduceMode::Personalized) {
    g.per_user = std::move(aggregated);
    return g;
  }
  Matrix mean(aggregated[0].rows(), aggregated[0].cols());
  for (const Matrix& m : aggregated) add_inplace(mean, m);
  scale_inplace(mean, 1.0 / double(aggregated.size()));
  mean.zero_row(0);
  g.mean = std::move(mean);
  return g;
}

Matrix fedavg_aggregate(const std::vector<const Matrix*>& tables) {
  if (tables.empty()) throw_data("fedavg_aggregate: no tables");
  Matrix mean(tables[0]->rows(), tables[0]->cols());
  for (const Matrix* t : tables) {
    if (t->rows() != mean.rows() || t->cols() != mean.cols())
      throw_dim("fedavg_aggregate: table shape mismatch (" + t->shape_str() +
                " vs " + mean.shape_str() + ")");
    add_inplace(mean, *t);
  }
  scale_inplace(mean, 1.0 / double(tables.size()));
  mean.zero_row(0);
  return mean;
}

}  // namespace ufg
