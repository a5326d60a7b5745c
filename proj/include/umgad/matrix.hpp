#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "umgad/errors.hpp"

namespace umgad {

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) throw ShapeMismatch("matrix value count does not match shape");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeMismatch("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Matrix& operator+=(const Matrix& o) {
    if (!same_shape(o)) throw ShapeMismatch("operator+= shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

/// out += a * b
inline void gemm_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  const double* bp = b.values().data();
  double* op = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = op + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = bp + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
}

/// out += a^T * b  (a: m x n, b: m x p, out: n x p)
inline void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
  double* op = out.values().data();
  for (std::size_t k = 0; k < m; ++k) {
    const auto brow = b.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* orow = op + i * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aki * brow[j];
    }
  }
}

/// out += a * b^T  (a: n x m, b: p x m, out: n x p)
inline void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const auto brow = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += arow[k] * brow[k];
      out(i, j) += s;
    }
  }
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeMismatch("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " * " +
                        std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix out(a.rows(), b.cols());
  gemm_acc(a, b, out);
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Compressed-sparse-row real matrix. Column indices sorted within a row.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return col_idx.size(); }

  double at(std::size_t r, std::size_t c) const {
    const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
    const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values[static_cast<std::size_t>(it - col_idx.begin())];
  }

  Matrix to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) d(r, col_idx[e]) = values[e];
    return d;
  }

  static SparseMatrix identity(std::size_t n) {
    SparseMatrix s;
    s.rows = s.cols = n;
    s.row_ptr.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      s.row_ptr[i + 1] = i + 1;
      s.col_idx.push_back(i);
      s.values.push_back(1.0);
    }
    return s;
  }
};

/// a * h for sparse a.
inline Matrix spmm(const SparseMatrix& a, const Matrix& h) {
  if (a.cols != h.rows()) throw ShapeMismatch("propagate: adjacency/feature row mismatch");
  Matrix out(a.rows, h.cols());
  const std::size_t p = h.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* orow = out.values().data() + r * p;
    for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      const double w = a.values[e];
      const double* hrow = h.values().data() + a.col_idx[e] * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += w * hrow[j];
    }
  }
  return out;
}

/// a^T * h for sparse a.
inline Matrix spmm_t(const SparseMatrix& a, const Matrix& h) {
  if (a.rows != h.rows()) throw ShapeMismatch("propagate backward: row mismatch");
  Matrix out(a.cols, h.cols());
  const std::size_t p = h.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* hrow = h.values().data() + r * p;
    for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      const double w = a.values[e];
      double* orow = out.values().data() + a.col_idx[e] * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += w * hrow[j];
    }
  }
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace umgad
