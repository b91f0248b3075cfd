#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "layers.hpp"
#include "matrix.hpp"
#include "rng.hpp"

using namespace ufg;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = 2.0 * rng.next_double() - 1.0;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("matrix");

TEST_CASE("matmul identity and hand-computed product") {
  Matrix id{{1, 0}, {0, 1}};
  Matrix b{{3, 4}, {5, 6}};
  CHECK(matmul(id, b) == b);

  Matrix a{{1, 2}};
  Matrix c{{3}, {4}};
  Matrix prod = matmul(a, c);
  CHECK(prod.rows() == 1);
  CHECK(prod.cols() == 1);
  CHECK(prod(0, 0) == 11.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Matrix a(2, 3), b(2, 3);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), Error);
}

TEST_CASE("matmul associativity on small random matrices") {
  Rng rng(12);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n1 = 1 + rng.next_below(8);
    const std::size_t n2 = 1 + rng.next_below(8);
    const std::size_t n3 = 1 + rng.next_below(8);
    const std::size_t n4 = 1 + rng.next_below(8);
    Matrix a = random_matrix(n1, n2, rng);
    Matrix b = random_matrix(n2, n3, rng);
    Matrix c = random_matrix(n3, n4, rng);
    Matrix left = matmul(matmul(a, b), c);
    Matrix right = matmul(a, matmul(b, c));
    CHECK(max_abs_diff(left, right) < 1e-9);
  }
}

TEST_CASE("matmul determinism: repeated calls bit-identical") {
  Rng rng(99);
  Matrix a = random_matrix(7, 5, rng);
  Matrix b = random_matrix(5, 6, rng);
  Matrix first = matmul(a, b);
  for (int i = 0; i < 5; ++i) CHECK(matmul(a, b) == first);
}

TEST_CASE("softmax_rows basics") {
  Matrix sym{{0, 0}};
  Matrix out = softmax_rows(sym);
  CHECK(out(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  // stabilized: huge equal inputs must not overflow
  Matrix big{{1000, 1000}};
  Matrix bout = softmax_rows(big);
  CHECK(bout(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  // closed form: softmax(0, ln 3) = (0.25, 0.75)
  Matrix lf{{0.0, std::log(3.0)}};
  Matrix lout = softmax_rows(lf);
  CHECK(lout(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(lout(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("softmax_rows rows sum to one and shift invariance") {
  Rng rng(7);
  for (int iter = 0; iter < 30; ++iter) {
    Matrix m = random_matrix(1 + rng.next_below(6), 1 + rng.next_below(9), rng);
    Matrix s = softmax_rows(m);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < s.cols(); ++j) {
        sum += s(i, j);
        CHECK(s(i, j) >= 0.0);
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
    Matrix shifted = m;
    const double c = 4.2 * (rng.next_double() - 0.5);
    for (std::size_t i = 0; i < shifted.rows(); ++i)
      for (std::size_t j = 0; j < shifted.cols(); ++j) shifted(i, j) += c;
    CHECK(max_abs_diff(softmax_rows(shifted), s) < 1e-12);
  }
}

TEST_CASE("linear layer forward basics") {
  Matrix x{{1, 0}};
  Matrix w{{1, 0}, {0, 1}};
  Matrix b(1, 2);
  Matrix y = linear_forward(x, w, b);
  CHECK(y(0, 0) == 1.0);
  CHECK(y(0, 1) == 0.0);
}

TEST_CASE("linear backward: bias gradient of sum is all ones") {
  Rng rng(3);
  Matrix x = random_matrix(4, 3, rng);
  Matrix w = random_matrix(3, 5, rng);
  Matrix g(4, 5);
  g.fill(1.0);  // upstream gradient of sum(output)
  LinearGrad lg = linear_backward(x, w, g);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(lg.db(0, j) == 4.0);
}

TEST_CASE("linear backward matches central finite differences") {
  Rng rng(41);
  Matrix x = random_matrix(3, 4, rng);
  Matrix w = random_matrix(4, 5, rng);
  Matrix b = random_matrix(1, 5, rng);
  Matrix g = random_matrix(3, 5, rng);  // fixed upstream gradient

  // loss = sum(g ⊙ (x w + b)) so dloss/dparam is exactly the chain result
  auto loss = [&](const Matrix& xx, const Matrix& ww, const Matrix& bb) {
    Matrix y = linear_forward(xx, ww, bb);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      acc += y.data()[i] * g.data()[i];
    return acc;
  };

  LinearGrad lg = linear_backward(x, w, g);
  const double h = 1e-5;
  auto check_grad = [&](Matrix& target, const Matrix& analytic,
                        auto&& eval) {
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double keep = target.data()[i];
      target.data()[i] = keep + h;
      const double up = eval();
      target.data()[i] = keep - h;
      const double dn = eval();
      target.data()[i] = keep;
      const double fd = (up - dn) / (2 * h);
      CHECK(analytic.data()[i] ==
            doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  };
  check_grad(w, lg.dw, [&] { return loss(x, w, b); });
  check_grad(b, lg.db, [&] { return loss(x, w, b); });
  check_grad(x, lg.dx, [&] { return loss(x, w, b); });
}

TEST_CASE("relu and sigmoid") {
  Matrix m{{-1, 0, 2}};
  Matrix r = relu_forward(m);
  CHECK(r(0, 0) == 0.0);
  CHECK(r(0, 1) == 0.0);
  CHECK(r(0, 2) == 2.0);

  // subgradient at 0 is defined as 0
  Matrix g{{1, 1, 1}};
  Matrix rb = relu_backward(m, g);
  CHECK(rb(0, 0) == 0.0);
  CHECK(rb(0, 1) == 0.0);
  CHECK(rb(0, 2) == 1.0);

  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-12));

  Matrix s = sigmoid_forward(Matrix{{0.3}});
  Matrix sg = sigmoid_backward(s, Matrix{{1.0}});
  const double expect = s(0, 0) * (1.0 - s(0, 0));
  CHECK(sg(0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("elementwise gradients match finite differences") {
  // rtol 1e-4 / atol 1e-8 on random inputs in [-1, 1]
  Rng rng(17);
  const double h = 1e-5;
  Matrix x = random_matrix(4, 6, rng);
  Matrix g = random_matrix(4, 6, rng);

  auto fd_check = [&](auto&& fwd, const Matrix& analytic) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      // avoid the relu kink: nudge points too close to 0
      if (std::fabs(x.data()[i]) < 10 * h) x.data()[i] = 0.1;
      const double keep = x.data()[i];
      x.data()[i] = keep + h;
      const double up = fwd();
      x.data()[i] = keep - h;
      const double dn = fwd();
      x.data()[i] = keep;
      const double fd = (up - dn) / (2 * h);
      const double got = analytic.data()[i];
      CHECK(std::fabs(got - fd) <= 1e-8 + 1e-4 * std::fabs(fd));
    }
  };

  auto relu_loss = [&] {
    Matrix y = relu_forward(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      acc += y.data()[i] * g.data()[i];
    return acc;
  };
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::fabs(x.data()[i]) < 10 * h) x.data()[i] = 0.1;
  fd_check(relu_loss, relu_backward(x, g));

  auto sig_loss = [&] {
    Matrix y = sigmoid_forward(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      acc += y.data()[i] * g.data()[i];
    return acc;
  };
  fd_check(sig_loss, sigmoid_backward(sigmoid_forward(x), g));
}

TEST_CASE("bce loss closed forms") {
  CHECK(bce_loss(1.0, 0.999999999) < 1e-8);
  CHECK(bce_loss(1.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_loss(0.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // logit form agrees with the direct form away from saturation
  for (double logit : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    const double p = sigmoid(logit);
    CHECK(bce_loss_from_logit(1.0, logit) ==
          doctest::Approx(bce_loss(1.0, p)).epsilon(1e-10));
    CHECK(bce_loss_from_logit(0.0, logit) ==
          doctest::Approx(bce_loss(0.0, p)).epsilon(1e-10));
  }
  // and stays finite where the direct form would overflow
  CHECK(std::isfinite(bce_loss_from_logit(1.0, -1000.0)));
  CHECK(std::isfinite(bce_loss_from_logit(0.0, 1000.0)));
}

TEST_SUITE_END();
