#pragma once

#include "matrix.hpp"

namespace ufg {

// Gradients of a linear layer y = x*w + b for an upstream gradient g:
//   dw = x^T g,  db = colsum(g),  dx = g w^T.
struct LinearGrad {
  Matrix dw;
  Matrix db;  // 1 x out
  Matrix dx;
};

// b is a 1 x w.cols() row vector, broadcast over rows of x.
Matrix linear_forward(const Matrix& x, const Matrix& w, const Matrix& b);
LinearGrad linear_backward(const Matrix& x, const Matrix& w, const Matrix& g);

Matrix relu_forward(const Matrix& x);
// Subgradient at 0 is 0: pass-through only where pre > 0.
Matrix relu_backward(const Matrix& pre, const Matrix& g);

double sigmoid(double x);
Matrix sigmoid_forward(const Matrix& x);
// g scaled by s(1-s) where s is the forward output.
Matrix sigmoid_backward(const Matrix& out, const Matrix& g);

// Binary cross entropy -(y ln p + (1-y) ln(1-p)); y in {0,1}, p in (0,1).
double bce_loss(double y, double p);
// Same loss from the pre-sigmoid logit, evaluated stably.
double bce_loss_from_logit(double y, double logit);

}  // namespace ufg
