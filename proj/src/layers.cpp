#include "layers.hpp"

#include <cmath>

#include "error.hpp"

namespace ufg {

Matrix linear_forward(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.rows())
    throw_dim("linear_forward: input " + x.shape_str() + " vs weight " +
              w.shape_str());
  if (b.rows() != 1 || b.cols() != w.cols())
    throw_dim("linear_forward: bias " + b.shape_str() + " vs weight " +
              w.shape_str());
  Matrix out = matmul(x, w);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  return out;
}

LinearGrad linear_backward(const Matrix& x, const Matrix& w, const Matrix& g) {
  if (g.rows() != x.rows() || g.cols() != w.cols())
    throw_dim("linear_backward: grad " + g.shape_str() + " vs output " +
              std::to_string(x.rows()) + "x" + std::to_string(w.cols()));
  LinearGrad lg;
  lg.dw = matmul(transpose(x), g);
  lg.db = col_sums(g);
  lg.dx = matmul(g, transpose(w));
  return lg;
}

Matrix relu_forward(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.data()[i] < 0.0) out.data()[i] = 0.0;
  return out;
}

Matrix relu_backward(const Matrix& pre, const Matrix& g) {
  if (pre.rows() != g.rows() || pre.cols() != g.cols())
    throw_dim("relu_backward: " + pre.shape_str() + " vs " + g.shape_str());
  Matrix out = g;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (pre.data()[i] <= 0.0) out.data()[i] = 0.0;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid_forward(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = sigmoid(out.data()[i]);
  return out;
}

Matrix sigmoid_backward(const Matrix& out, const Matrix& g) {
  if (out.rows() != g.rows() || out.cols() != g.cols())
    throw_dim("sigmoid_backward: " + out.shape_str() + " vs " + g.shape_str());
  Matrix dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double s = out.data()[i];
    dx.data()[i] *= s * (1.0 - s);
  }
  return dx;
}

double bce_loss(double y, double p) {
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

double bce_loss_from_logit(double y, double logit) {
  // softplus(logit) - y*logit, with the large-|logit| branch folded in.
  const double sp =
      (logit > 0.0) ? logit + std::log1p(std::exp(-logit))
                    : std::log1p(std::exp(logit));
  return sp - y * logit;
}

}  // namespace ufg
