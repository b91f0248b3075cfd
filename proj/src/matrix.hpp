#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace ufg {

// Dense row-major matrix of doubles. All kernel ops accumulate row-major,
// left to right, so repeated runs are bit-identical.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  void fill(double v);
  void zero_row(std::size_t r);
  std::string shape_str() const;  // e.g. "3x4"

  bool all_finite() const;

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           data_ == other.data_;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

// Row-wise softmax, stabilized by subtracting the row max.
Matrix softmax_rows(const Matrix& m);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
void add_inplace(Matrix& a, const Matrix& b);
// a += s * b
void axpy_inplace(Matrix& a, double s, const Matrix& b);
void scale_inplace(Matrix& m, double s);

// Sum over rows, returned as a 1 x cols matrix.
Matrix col_sums(const Matrix& m);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace ufg
