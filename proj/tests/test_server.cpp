#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "server.hpp"
#include "rng.hpp"

using namespace ufg;

namespace {

UploadPacket packet_with(const Matrix& w) {
  UploadPacket p;
  p.graph_weights = w;
  p.item_table = Matrix(2, 2);
  return p;
}

std::vector<std::vector<double>> random_vectors(std::size_t n, std::size_t dim,
                                                Rng& rng) {
  std::vector<std::vector<double>> out(n, std::vector<double>(dim));
  for (auto& v : out)
    for (double& x : v) x = 2.0 * rng.next_double() - 1.0;
  return out;
}

// Plain-loop reference: N = D^-1/2 A D^-1/2, R_i = sum_j N_ij T_j. Written
// without the Matrix kernel so it stays an independent route.
std::vector<std::vector<double>> dense_reference(
    const UserGraph& g, const std::vector<Matrix>& tables) {
  const std::size_t n = g.n;
  const std::size_t cells = tables[0].size();
  std::vector<std::vector<double>> norm(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.edge(i, j))
        norm[i][j] = 1.0 / (std::sqrt(double(g.degrees[i])) *
                            std::sqrt(double(g.degrees[j])));
  std::vector<std::vector<double>> out(n, std::vector<double>(cells, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (norm[i][j] == 0.0) continue;
      for (std::size_t c = 0; c < cells; ++c)
        out[i][c] += norm[i][j] * tables[j].data()[c];
    }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("server");

TEST_CASE("vectorize_weights flattens row-major") {
  Matrix w{{1, 2}, {3, 4}};
  const auto v = vectorize_weights(packet_with(w));
  CHECK(v == std::vector<double>{1, 2, 3, 4});

  Matrix z(3, 2);
  const auto zv = vectorize_weights(packet_with(z));
  for (double x : zv) CHECK(x == 0.0);

  // round-trip reshape recovers the matrix
  Matrix back(2, 2);
  for (std::size_t i = 0; i < 4; ++i) back.data()[i] = v[i];
  CHECK(back == w);
}

TEST_CASE("cosine similarity matrix") {
  std::vector<std::vector<double>> vecs = {{1, 0}, {0, 1}, {1, 1}, {2, 0}};
  SimilarityMatrix s = similarity_matrix(vecs);
  CHECK(s.values(0, 0) == 1.0);
  CHECK(s.values(0, 1) == 0.0);
  CHECK(s.values(0, 2) == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(s.values(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.degenerate.empty());

  SUBCASE("symmetry and diagonal invariants") {
    Rng rng(21);
    auto rv = random_vectors(6, 9, rng);
    SimilarityMatrix r = similarity_matrix(rv);
    for (std::size_t i = 0; i < r.n; ++i) {
      CHECK(r.values(i, i) == 1.0);
      for (std::size_t j = 0; j < r.n; ++j) {
        CHECK(r.values(i, j) == r.values(j, i));
        CHECK(r.values(i, j) <= 1.0);
        CHECK(r.values(i, j) >= -1.0);
      }
    }
  }
  SUBCASE("all-zero vector is degenerate, not fatal") {
    std::vector<std::vector<double>> dz = {{1, 0}, {0, 0}};
    SimilarityMatrix s2 = similarity_matrix(dz);
    CHECK(s2.degenerate == std::vector<std::size_t>{1});
    CHECK(s2.values(1, 1) == 1.0);
    CHECK(s2.values(0, 1) == 0.0);
  }
  SUBCASE("scale invariance under positive rescaling") {
    Rng rng(22);
    auto rv = random_vectors(5, 7, rng);
    SimilarityMatrix base = similarity_matrix(rv);
    rv[2] = rv[2];
    for (double& x : rv[2]) x *= 37.5;
    SimilarityMatrix scaled = similarity_matrix(rv);
    CHECK(max_abs_diff(base.values, scaled.values) < 1e-12);
  }
}

TEST_CASE("top-k graph construction") {
  // user 0's best neighbor is user 2
  SimilarityMatrix s;
  s.n = 3;
  s.values = Matrix{{1.0, 0.1, 0.9}, {0.1, 1.0, 0.5}, {0.9, 0.5, 1.0}};
  UserGraph g = build_topk_graph(s, 1);
  CHECK(g.edge(0, 0));
  CHECK(g.edge(0, 2));
  CHECK_FALSE(g.edge(0, 1));
  CHECK(g.degrees[0] == 2);

  SUBCASE("k = n-1 gives the complete graph with self-loops") {
    UserGraph full = build_topk_graph(s, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(full.degrees[i] == 3);
      for (std::size_t j = 0; j < 3; ++j) CHECK(full.edge(i, j));
    }
  }
  SUBCASE("ties choose the lower index") {
    SimilarityMatrix t;
    t.n = 3;
    t.values = Matrix{{1.0, 0.4, 0.4}, {0.4, 1.0, 0.4}, {0.4, 0.4, 1.0}};
    UserGraph tg = build_topk_graph(t, 1);
    CHECK(tg.edge(0, 1));
    CHECK_FALSE(tg.edge(0, 2));
    CHECK(tg.edge(1, 0));
    CHECK(tg.edge(2, 0));
  }
  SUBCASE("k out of range is a parameter error") {
    CHECK_THROWS_AS(build_topk_graph(s, 0), Error);
    CHECK_THROWS_AS(build_topk_graph(s, 3), Error);
  }
  SUBCASE("rows are independent (directed) unless symmetrized") {
    // user 1 prefers 2, user 2 prefers 0: edge 1->2 without 2->1
    SimilarityMatrix d;
    d.n = 3;
    d.values = Matrix{{1.0, 0.2, 0.9}, {0.2, 1.0, 0.8}, {0.9, 0.8, 1.0}};
    UserGraph dg = build_topk_graph(d, 1);
    CHECK(dg.edge(1, 2));
    CHECK_FALSE(dg.edge(2, 1));
    UserGraph sg = build_topk_graph(d, 1, true);
    CHECK(sg.edge(2, 1));
    CHECK(sg.degrees[2] == 3);  // self + 0 + mirrored 1
  }
  SUBCASE("top-k selection is invariant under positive rescaling") {
    Rng rng(23);
    auto rv = random_vectors(6, 11, rng);
    UserGraph base = build_topk_graph(similarity_matrix(rv), 2);
    for (double& x : rv[4]) x *= 1e3;
    for (double& x : rv[0]) x *= 0.002;
    UserGraph scaled = build_topk_graph(similarity_matrix(rv), 2);
    CHECK(base.adjacency == scaled.adjacency);
  }
}

TEST_CASE("gcn aggregation identities") {
  SUBCASE("self-loops-only graph is the identity") {
    UserGraph g;
    g.n = 3;
    g.k = 0;
    g.adjacency.assign(9, 0);
    for (std::size_t i = 0; i < 3; ++i) g.adjacency[i * 3 + i] = 1;
    g.degrees = {1, 1, 1};
    Rng rng(24);
    std::vector<Matrix> tables;
    std::vector<const Matrix*> ptrs;
    for (int i = 0; i < 3; ++i) {
      Matrix t(4, 2);
      for (std::size_t c = 0; c < t.size(); ++c)
        t.data()[c] = rng.next_double();
      t.zero_row(0);
      tables.push_back(t);
    }
    for (auto& t : tables) ptrs.push_back(&t);
    auto r = gcn_aggregate(g, ptrs);
    for (int i = 0; i < 3; ++i) CHECK(max_abs_diff(r[i], tables[i]) == 0.0);
  }
  SUBCASE("complete graph with equal tables is a fixed point") {
    SimilarityMatrix s;
    s.n = 2;
    s.values = Matrix{{1.0, 0.3}, {0.3, 1.0}};
    UserGraph g = build_topk_graph(s, 1);
    Matrix t(3, 2);
    t(1, 0) = 0.5;
    t(2, 1) = -0.25;
    std::vector<const Matrix*> ptrs = {&t, &t};
    auto r = gcn_aggregate(g, ptrs);
    CHECK(max_abs_diff(r[0], t) < 1e-15);
    CHECK(max_abs_diff(r[1], t) < 1e-15);
  }
  SUBCASE("random instances match the dense reference") {
    Rng rng(25);
    for (int iter = 0; iter < 60; ++iter) {
      const std::size_t n = 2 + rng.next_below(7);  // 2..8
      const std::size_t k = 1 + rng.next_below(n - 1);
      auto vecs = random_vectors(n, 6, rng);
      UserGraph g = build_topk_graph(similarity_matrix(vecs), k);
      std::vector<Matrix> tables;
      for (std::size_t i = 0; i < n; ++i) {
        Matrix t(5, 3);
        for (std::size_t c = 0; c < t.size(); ++c)
          t.data()[c] = 2.0 * rng.next_double() - 1.0;
        t.zero_row(0);
        tables.push_back(t);
      }
      std::vector<const Matrix*> ptrs;
      for (auto& t : tables) ptrs.push_back(&t);
      auto got = gcn_aggregate(g, ptrs);
      auto expect = dense_reference(g, tables);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < tables[0].size(); ++c)
          CHECK(std::fabs(got[i].data()[c] - expect[i][c]) < 1e-12);
    }
  }
  SUBCASE("row-stochastic sanity of D^-1 A") {
    Rng rng(26);
    auto vecs = random_vectors(7, 5, rng);
    UserGraph g = build_topk_graph(similarity_matrix(vecs), 3);
    for (std::size_t i = 0; i < g.n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < g.n; ++j)
        if (g.edge(i, j)) row += 1.0 / double(g.degrees[i]);
      CHECK(std::fabs(row - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("reduce modes") {
  Matrix a{{0, 0}, {2, 2}};
  Matrix b{{0, 0}, {4, 4}};

  SUBCASE("single table is returned unchanged in both modes") {
    GlobalEmbedding m = reduce_global({a}, ReduceMode::Mean);
    CHECK(max_abs_diff(m.for_client(0), a) == 0.0);
    GlobalEmbedding p = reduce_global({a}, ReduceMode::Personalized);
    CHECK(max_abs_diff(p.for_client(0), a) == 0.0);
  }
  SUBCASE("mean mode averages") {
    GlobalEmbedding m = reduce_global({a, b}, ReduceMode::Mean);
    CHECK(m.for_client(0)(1, 0) == 3.0);
    CHECK(m.for_client(1)(1, 1) == 3.0);
  }
  SUBCASE("personalized mode passes tables through") {
    GlobalEmbedding p = reduce_global({a, b}, ReduceMode::Personalized);
    CHECK(max_abs_diff(p.for_client(0), a) == 0.0);
    CHECK(max_abs_diff(p.for_client(1), b) == 0.0);
  }
  SUBCASE("mean is invariant under client relabeling") {
    GlobalEmbedding m1 = reduce_global({a, b}, ReduceMode::Mean);
    GlobalEmbedding m2 = reduce_global({b, a}, ReduceMode::Mean);
    CHECK(max_abs_diff(m1.mean, m2.mean) == 0.0);
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(reduce_global({}, ReduceMode::Mean), Error);
  }
}

TEST_CASE("fedavg aggregation") {
  Matrix a{{0}, {0}};
  Matrix b{{0}, {2}};
  std::vector<const Matrix*> ptrs = {&a, &b};
  Matrix mean = fedavg_aggregate(ptrs);
  CHECK(mean(1, 0) == 1.0);

  SUBCASE("identical tables are a fixed point") {
    std::vector<const Matrix*> same = {&b, &b, &b};
    CHECK(max_abs_diff(fedavg_aggregate(same), b) == 0.0);
  }
  SUBCASE("equals the gcn path on a complete graph with equal tables") {
    Rng rng(27);
    Matrix t(6, 4);
    for (std::size_t c = 0; c < t.size(); ++c)
      t.data()[c] = rng.next_double();
    t.zero_row(0);
    std::vector<const Matrix*> tables = {&t, &t, &t, &t};
    SimilarityMatrix s;
    s.n = 4;
    s.values = Matrix(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) s.values(i, j) = i == j ? 1.0 : 0.5;
    UserGraph g = build_topk_graph(s, 3);
    GlobalEmbedding viagcn =
        reduce_global(gcn_aggregate(g, tables), ReduceMode::Mean);
    CHECK(max_abs_diff(viagcn.mean, fedavg_aggregate(tables)) < 1e-12);
  }
  SUBCASE("shape mismatch is a shape error") {
    Matrix c(3, 1);
    std::vector<const Matrix*> bad = {&a, &c};
    CHECK_THROWS_AS(fedavg_aggregate(bad), Error);
  }
}

TEST_SUITE_END();
