#pragma once

#include <cstdint>
#include <vector>

#include "client_model.hpp"
#include "matrix.hpp"

namespace ufg {

// Pairwise cosine similarities; symmetric, unit diagonal, entries clamped to
// [-1, 1]. Clients whose weight vector is all-zero are listed in degenerate
// and get similarity 0 to everyone else.
struct SimilarityMatrix {
  std::size_t n = 0;
  Matrix values;
  std::vector<std::size_t> degenerate;
};

// Directed top-k graph with self-loops: row i holds i's chosen neighbors.
struct UserGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<uint8_t> adjacency;      // row-major n x n
  std::vector<std::size_t> degrees;    // row sums, self-loop included

  bool edge(std::size_t i, std::size_t j) const {
    return adjacency[i * n + j] != 0;
  }
};

// Row-major flattening of the uploaded weight matrix.
std::vector<double> vectorize_weights(const UploadPacket& packet);

SimilarityMatrix similarity_matrix(const std::vector<std::vector<double>>& vectors);

// Each user selects its k most similar peers (ties broken by lower index)
// and a self-loop; rows are independent unless symmetrize is set.
UserGraph build_topk_graph(const SimilarityMatrix& s, std::size_t k,
                           bool symmetrize = false);

// One propagation step R_i = sum_j N_ij table_j with N = D^-1/2 A D^-1/2.
// The item-table padding row stays zero.
std::vector<Matrix> gcn_aggregate(const UserGraph& graph,
                                  const std::vector<const Matrix*>& tables);

enum class ReduceMode { Mean, Personalized };

struct GlobalEmbedding {
  ReduceMode mode = ReduceMode::Mean;
  std::size_t round = 0;
  Matrix mean;                   // Mean mode
  std::vector<Matrix> per_user;  // Personalized mode

  const Matrix& for_client(std::size_t i) const {
    return mode == ReduceMode::Mean ? mean : per_user[i];
  }
};

GlobalEmbedding reduce_global(std::vector<Matrix> aggregated, ReduceMode mode);

// Unweighted elementwise mean of the uploaded tables (graph-free baseline).
Matrix fedavg_aggregate(const std::vector<const Matrix*>& tables);

}  // namespace ufg
