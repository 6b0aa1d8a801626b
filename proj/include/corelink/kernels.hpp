#pragma once

#include "corelink/matrix.hpp"

namespace corelink::kernels {

// Serial reference implementations, kept for testing and benchmarking against
// the parallel variants below.
namespace serial {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);     // out = a * b
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);  // out = a * b^T
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);  // out = a^T * b
void softmax_rows(const Matrix& x, Matrix& out);
void layer_norm_rows(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                     double eps, Matrix& out);
void relu(const Matrix& x, Matrix& out);
void add(const Matrix& a, const Matrix& b, Matrix& out);
void add_row_broadcast(const Matrix& a, const Matrix& bias, Matrix& out);
void scale(const Matrix& a, double s, Matrix& out);
}  // namespace serial

// OpenMP-parallel variants. Each output element is produced by exactly one
// thread through the same inner routine the serial reference uses, so results
// are bit-identical to serial for any thread count.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
void softmax_rows(const Matrix& x, Matrix& out);
void layer_norm_rows(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                     double eps, Matrix& out);
void relu(const Matrix& x, Matrix& out);
void add(const Matrix& a, const Matrix& b, Matrix& out);
void add_row_broadcast(const Matrix& a, const Matrix& bias, Matrix& out);
void scale(const Matrix& a, double s, Matrix& out);

// Allocating conveniences over the parallel variants.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  matmul(a, b, out);
  return out;
}
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.rows);
  matmul_nt(a, b, out);
  return out;
}
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols, b.cols);
  matmul_tn(a, b, out);
  return out;
}
inline Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  softmax_rows(x, out);
  return out;
}
inline Matrix layer_norm_rows(const Matrix& x, const Matrix& gamma,
                              const Matrix& beta, double eps) {
  Matrix out(x.rows, x.cols);
  layer_norm_rows(x, gamma, beta, eps, out);
  return out;
}
inline Matrix relu(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  relu(x, out);
  return out;
}
inline Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, a.cols);
  add(a, b, out);
  return out;
}
inline Matrix add_row_broadcast(const Matrix& a, const Matrix& bias) {
  Matrix out(a.rows, a.cols);
  add_row_broadcast(a, bias, out);
  return out;
}
inline Matrix scale(const Matrix& a, double s) {
  Matrix out(a.rows, a.cols);
  scale(a, s, out);
  return out;
}

}  // namespace corelink::kernels
