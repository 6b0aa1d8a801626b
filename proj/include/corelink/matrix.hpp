#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace corelink {

// Dense row-major matrix of doubles; the single numeric container shared by
// the kernels, the autodiff tape and the metrics. Vectors are 1 x n or n x 1.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c)
      : rows(r), cols(c),
        data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {
    assert(r >= 0 && c >= 0);
  }
  Matrix(int r, int c, std::initializer_list<double> values) : Matrix(r, c) {
    assert(values.size() == data.size());
    std::copy(values.begin(), values.end(), data.begin());
  }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}
inline bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  assert(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

inline bool all_finite(const Matrix& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

// Structural helpers used by both the pure forward path and the tape ops.

inline Matrix gather_rows(const Matrix& a, const std::vector<int>& idx) {
  Matrix out(static_cast<int>(idx.size()), a.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    assert(idx[i] >= 0 && idx[i] < a.rows);
    std::copy(a.row_ptr(idx[i]), a.row_ptr(idx[i]) + a.cols, out.row_ptr(static_cast<int>(i)));
  }
  return out;
}

inline Matrix slice_cols(const Matrix& a, int c0, int c1) {
  assert(0 <= c0 && c0 <= c1 && c1 <= a.cols);
  Matrix out(a.rows, c1 - c0);
  for (int r = 0; r < a.rows; ++r)
    std::copy(a.row_ptr(r) + c0, a.row_ptr(r) + c1, out.row_ptr(r));
  return out;
}

inline Matrix concat_cols(const std::vector<Matrix>& parts) {
  assert(!parts.empty());
  int cols = 0;
  for (const Matrix& p : parts) {
    assert(p.rows == parts[0].rows);
    cols += p.cols;
  }
  Matrix out(parts[0].rows, cols);
  for (int r = 0; r < out.rows; ++r) {
    double* dst = out.row_ptr(r);
    for (const Matrix& p : parts) {
      std::copy(p.row_ptr(r), p.row_ptr(r) + p.cols, dst);
      dst += p.cols;
    }
  }
  return out;
}

inline Matrix concat_rows(const std::vector<Matrix>& parts) {
  assert(!parts.empty());
  int rows = 0;
  for (const Matrix& p : parts) {
    assert(p.cols == parts[0].cols);
    rows += p.rows;
  }
  Matrix out(rows, parts[0].cols);
  int r = 0;
  for (const Matrix& p : parts) {
    std::copy(p.data.begin(), p.data.end(), out.row_ptr(r));
    r += p.rows;
  }
  return out;
}

}  // namespace corelink
