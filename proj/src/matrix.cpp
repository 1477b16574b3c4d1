#include "relab/nn/matrix.hpp"

#include <cmath>
#include <string>

#include "relab/error.hpp"

namespace relab::nn {

namespace {

std::string shape_str(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + " x " + std::to_string(m.cols()) + "]";
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) +
                       " and " + shape_str(b));
}

}  // namespace

Matrix::Matrix(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0)
    throw DimensionError("matrix: negative dimension " + std::to_string(rows) + " x " +
                         std::to_string(cols));
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Matrix Matrix::from(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c)
      throw DimensionError("matrix: ragged initializer rows");
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

void Matrix::fill(double value) {
  for (auto& v : data_) v = value;
}

double Matrix::at(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw BoundsError("matrix: index (" + std::to_string(r) + ", " + std::to_string(c) +
                      ") outside " + shape_str(*this));
  return (*this)(r, c);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(m, n);
  for (int i = 0; i < m; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int l = 0; l < k; ++l) {
      const double av = ai[l];
      const double* bl = b.row(l);
      for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_error("matmul_tn", a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(k, n);
  for (int l = 0; l < m; ++l) {
    const double* al = a.row(l);
    const double* bl = b.row(l);
    for (int i = 0; i < k; ++i) {
      double* ci = c.row(i);
      const double av = al[i];
      for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
  const int m = a.rows(), k = a.cols(), n = b.rows();
  Matrix c(m, n);
  for (int i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int j = 0; j < n; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] = acc;
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void add_inplace(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("add", a, b);
  double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0, n = a.size(); i < n; ++i) pa[i] += pb[i];
}

void axpy_inplace(Matrix& a, double scale, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("axpy", a, b);
  double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0, n = a.size(); i < n; ++i) pa[i] += scale * pb[i];
}

void scale_inplace(Matrix& a, double scale) {
  double* pa = a.data();
  for (int i = 0, n = a.size(); i < n; ++i) pa[i] *= scale;
}

void hadamard_inplace(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("hadamard", a, b);
  double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0, n = a.size(); i < n; ++i) pa[i] *= pb[i];
}

void add_row_inplace(Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a, row);
  const double* pr = row.data();
  for (int i = 0; i < a.rows(); ++i) {
    double* pa = a.row(i);
    for (int j = 0; j < a.cols(); ++j) pa[j] += pr[j];
  }
}

Matrix sum_rows(const Matrix& a) {
  Matrix out(1, a.cols());
  double* po = out.data();
  for (int i = 0; i < a.rows(); ++i) {
    const double* pa = a.row(i);
    for (int j = 0; j < a.cols(); ++j) po[j] += pa[j];
  }
  return out;
}

bool all_finite(const Matrix& a) {
  const double* p = a.data();
  for (int i = 0, n = a.size(); i < n; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

bool operator==(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  const double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0, n = a.size(); i < n; ++i)
    if (pa[i] != pb[i]) return false;
  return true;
}

}  // namespace relab::nn
