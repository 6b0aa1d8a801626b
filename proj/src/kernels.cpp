#include "corelink/kernels.hpp"

#include <cassert>
#include <cmath>

namespace corelink::kernels {

// Row-level routines shared by the serial and the OpenMP paths. Accumulation
// order inside a row is fixed, which is what makes the two paths bit-identical.
namespace {

// c_row = a_row (1 x k) * b (k x n), accumulated in ascending k.
inline void matmul_row(const double* a_row, const Matrix& b, double* c_row) {
  const int k = b.rows, n = b.cols;
  for (int j = 0; j < n; ++j) c_row[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double apv = a_row[p];
    if (apv == 0.0) continue;
    const double* b_row = b.row_ptr(p);
    for (int j = 0; j < n; ++j) c_row[j] += apv * b_row[j];
  }
}

// c_row[j] = dot(a_row, b_row_j), b used as (n x k), ascending k.
inline void matmul_nt_row(const double* a_row, const Matrix& b, double* c_row) {
  const int k = b.cols, n = b.rows;
  for (int j = 0; j < n; ++j) {
    const double* b_row = b.row_ptr(j);
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
    c_row[j] = acc;
  }
}

// out_row r of a^T * b: out(r, :) = sum_i a(i, r) * b(i, :), ascending i.
inline void matmul_tn_row(const Matrix& a, const Matrix& b, int r, double* c_row) {
  const int n = b.cols, m = a.rows;
  for (int j = 0; j < n; ++j) c_row[j] = 0.0;
  for (int i = 0; i < m; ++i) {
    const double av = a(i, r);
    if (av == 0.0) continue;
    const double* b_row = b.row_ptr(i);
    for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
  }
}

inline void softmax_row(const double* x, int n, double* y) {
  double mx = x[0];
  for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    y[j] = std::exp(x[j] - mx);
    sum += y[j];
  }
  const double inv = 1.0 / sum;
  for (int j = 0; j < n; ++j) y[j] *= inv;
}

inline void layer_norm_row(const double* x, int n, const double* gamma,
                           const double* beta, double eps, double* y) {
  double mean = 0.0;
  for (int j = 0; j < n; ++j) mean += x[j];
  mean /= n;
  double var = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = x[j] - mean;
    var += d * d;
  }
  var /= n;
  const double rstd = 1.0 / std::sqrt(var + eps);
  for (int j = 0; j < n; ++j) y[j] = (x[j] - mean) * rstd * gamma[j] + beta[j];
}

}  // namespace

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.rows && out.rows == a.rows && out.cols == b.cols);
  for (int i = 0; i < a.rows; ++i) matmul_row(a.row_ptr(i), b, out.row_ptr(i));
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.cols && out.rows == a.rows && out.cols == b.rows);
  for (int i = 0; i < a.rows; ++i) matmul_nt_row(a.row_ptr(i), b, out.row_ptr(i));
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows == b.rows && out.rows == a.cols && out.cols == b.cols);
  for (int r = 0; r < a.cols; ++r) matmul_tn_row(a, b, r, out.row_ptr(r));
}

void softmax_rows(const Matrix& x, Matrix& out) {
  assert(x.same_shape(out) && x.cols > 0);
  for (int i = 0; i < x.rows; ++i) softmax_row(x.row_ptr(i), x.cols, out.row_ptr(i));
}

void layer_norm_rows(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                     double eps, Matrix& out) {
  assert(x.same_shape(out) && gamma.cols == x.cols && beta.cols == x.cols);
  for (int i = 0; i < x.rows; ++i)
    layer_norm_row(x.row_ptr(i), x.cols, gamma.row_ptr(0), beta.row_ptr(0), eps,
                   out.row_ptr(i));
}

void relu(const Matrix& x, Matrix& out) {
  assert(x.same_shape(out));
  for (std::size_t i = 0; i < x.data.size(); ++i)
    out.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
}

void add(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.same_shape(b) && a.same_shape(out));
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
}

void add_row_broadcast(const Matrix& a, const Matrix& bias, Matrix& out) {
  assert(bias.rows == 1 && bias.cols == a.cols && a.same_shape(out));
  for (int i = 0; i < a.rows; ++i) {
    const double* ar = a.row_ptr(i);
    const double* br = bias.row_ptr(0);
    double* orow = out.row_ptr(i);
    for (int j = 0; j < a.cols; ++j) orow[j] = ar[j] + br[j];
  }
}

void scale(const Matrix& a, double s, Matrix& out) {
  assert(a.same_shape(out));
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * s;
}

}  // namespace serial

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.rows && out.rows == a.rows && out.cols == b.cols);
#pragma omp parallel for schedule(static) if (a.rows > 1 && a.size() * b.cols > 16384)
  for (int i = 0; i < a.rows; ++i) matmul_row(a.row_ptr(i), b, out.row_ptr(i));
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.cols && out.rows == a.rows && out.cols == b.rows);
#pragma omp parallel for schedule(static) if (a.rows > 1 && a.size() * b.rows > 16384)
  for (int i = 0; i < a.rows; ++i) matmul_nt_row(a.row_ptr(i), b, out.row_ptr(i));
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows == b.rows && out.rows == a.cols && out.cols == b.cols);
#pragma omp parallel for schedule(static) if (a.cols > 1 && a.size() * b.cols > 16384)
  for (int r = 0; r < a.cols; ++r) matmul_tn_row(a, b, r, out.row_ptr(r));
}

void softmax_rows(const Matrix& x, Matrix& out) {
  assert(x.same_shape(out) && x.cols > 0);
#pragma omp parallel for schedule(static) if (x.rows > 8)
  for (int i = 0; i < x.rows; ++i) softmax_row(x.row_ptr(i), x.cols, out.row_ptr(i));
}

void layer_norm_rows(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                     double eps, Matrix& out) {
  assert(x.same_shape(out) && gamma.cols == x.cols && beta.cols == x.cols);
#pragma omp parallel for schedule(static) if (x.rows > 8)
  for (int i = 0; i < x.rows; ++i)
    layer_norm_row(x.row_ptr(i), x.cols, gamma.row_ptr(0), beta.row_ptr(0), eps,
                   out.row_ptr(i));
}

void relu(const Matrix& x, Matrix& out) {
  assert(x.same_shape(out));
  const long long n = static_cast<long long>(x.data.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (long long i = 0; i < n; ++i)
    out.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
}

void add(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.same_shape(b) && a.same_shape(out));
  const long long n = static_cast<long long>(a.data.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (long long i = 0; i < n; ++i) out.data[i] = a.data[i] + b.data[i];
}

void add_row_broadcast(const Matrix& a, const Matrix& bias, Matrix& out) {
  assert(bias.rows == 1 && bias.cols == a.cols && a.same_shape(out));
#pragma omp parallel for schedule(static) if (a.rows > 8)
  for (int i = 0; i < a.rows; ++i) {
    const double* ar = a.row_ptr(i);
    const double* br = bias.row_ptr(0);
    double* orow = out.row_ptr(i);
    for (int j = 0; j < a.cols; ++j) orow[j] = ar[j] + br[j];
  }
}

void scale(const Matrix& a, double s, Matrix& out) {
  assert(a.same_shape(out));
  const long long n = static_cast<long long>(a.data.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (long long i = 0; i < n; ++i) out.data[i] = a.data[i] * s;
}

}  // namespace corelink::kernels
