#pragma once

#include <initializer_list>
#include <vector>

namespace relab::nn {

/**
 * Dense row-major matrix of double. The only tensor type in the framework;
 * a batch of states is a [batch x dim] matrix, a vector is a [1 x dim] matrix.
 *
 * Shape-changing operations never happen implicitly: every binary op checks
 * shapes and raises DimensionError on mismatch.
 */
class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  /// Builds from nested braces: Matrix::from({{1, 2}, {3, 4}}).
  static Matrix from(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(double value);
  void zero() { fill(0.0); }

  /// Checked element access; raises BoundsError outside [0,rows) x [0,cols).
  double at(int r, int c) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// C = A * B. [m x k] * [k x n] -> [m x n].
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A^T * B. [m x k]^T * [m x n] -> [k x n]. Used for weight gradients.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// C = A * B^T. [m x k] * [n x k]^T -> [m x n]. Used for input gradients.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// a += b (same shape).
void add_inplace(Matrix& a, const Matrix& b);

/// a += scale * b (same shape).
void axpy_inplace(Matrix& a, double scale, const Matrix& b);

/// a *= scale.
void scale_inplace(Matrix& a, double scale);

/// Elementwise a *= b (same shape).
void hadamard_inplace(Matrix& a, const Matrix& b);

/// Adds a [1 x n] row vector to every row of a [m x n] matrix.
void add_row_inplace(Matrix& a, const Matrix& row);

/// Sums the rows of a [m x n] matrix into a [1 x n] row vector.
Matrix sum_rows(const Matrix& a);

/// True when all entries are finite.
bool all_finite(const Matrix& a);

bool operator==(const Matrix& a, const Matrix& b);

}  // namespace relab::nn
