#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corelink/kernels.hpp"
#include "corelink/matrix.hpp"
#include "corelink/rng.hpp"

using namespace corelink;

namespace {

Matrix random_matrix(Rng& rng, int r, int c, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal(0.0, scale);
  return m;
}

// Plain triple loop, deliberately in a different loop order than the kernels.
Matrix matmul_naive(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (int j = 0; j < b.cols; ++j)
    for (int i = 0; i < a.rows; ++i) {
      double acc = 0.0;
      for (int k = a.cols - 1; k >= 0; --k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

}  // namespace

TEST_CASE("matmul matches naive oracle") {
  Rng rng(7);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {3, 4, 5}, {17, 9, 13}, {64, 32, 48}}) {
    Matrix a = random_matrix(rng, m, k);
    Matrix b = random_matrix(rng, k, n);
    Matrix c = kernels::matmul(a, b);
    Matrix ref = matmul_naive(a, b);
    CHECK(max_abs_diff(c, ref) < 1e-12);
  }
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(11);
  for (auto [m, k, n] : {std::tuple{1, 3, 2}, {5, 7, 3}, {33, 65, 17}, {128, 64, 96}}) {
    Matrix a = random_matrix(rng, m, k);
    Matrix b = random_matrix(rng, k, n);
    Matrix bt = random_matrix(rng, n, k);
    Matrix a2 = random_matrix(rng, m, n);

    Matrix p(m, n), s(m, n);
    kernels::matmul(a, b, p);
    kernels::serial::matmul(a, b, s);
    CHECK(p == s);

    Matrix pnt(m, n), snt(m, n);
    kernels::matmul_nt(a, bt, pnt);
    kernels::serial::matmul_nt(a, bt, snt);
    CHECK(pnt == snt);

    Matrix ptn(k, n), stn(k, n);
    Matrix a3 = random_matrix(rng, m, k);
    Matrix b3 = random_matrix(rng, m, n);
    kernels::matmul_tn(a3, b3, ptn);
    kernels::serial::matmul_tn(a3, b3, stn);
    CHECK(ptn == stn);

    Matrix psm(m, n), ssm(m, n);
    kernels::softmax_rows(a2, psm);
    kernels::serial::softmax_rows(a2, ssm);
    CHECK(psm == ssm);

    Matrix gamma = random_matrix(rng, 1, n);
    Matrix beta = random_matrix(rng, 1, n);
    Matrix pln(m, n), sln(m, n);
    kernels::layer_norm_rows(a2, gamma, beta, 1e-5, pln);
    kernels::serial::layer_norm_rows(a2, gamma, beta, 1e-5, sln);
    CHECK(pln == sln);

    Matrix pr(m, n), sr(m, n);
    kernels::relu(a2, pr);
    kernels::serial::relu(a2, sr);
    CHECK(pr == sr);

    Matrix b4 = random_matrix(rng, m, n);
    Matrix pa(m, n), sa(m, n);
    kernels::add(a2, b4, pa);
    kernels::serial::add(a2, b4, sa);
    CHECK(pa == sa);

    Matrix bias = random_matrix(rng, 1, n);
    Matrix pb(m, n), sb(m, n);
    kernels::add_row_broadcast(a2, bias, pb);
    kernels::serial::add_row_broadcast(a2, bias, sb);
    CHECK(pb == sb);

    Matrix ps(m, n), ss(m, n);
    kernels::scale(a2, 0.37, ps);
    kernels::serial::scale(a2, 0.37, ss);
    CHECK(ps == ss);
  }
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  Rng rng(3);
  Matrix x = random_matrix(rng, 12, 9, 3.0);
  Matrix y = kernels::softmax_rows(x);
  for (int i = 0; i < y.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < y.cols; ++j) s += y(i, j);
    CHECK(std::fabs(s - 1.0) < 1e-12);
  }
  Matrix xs = x;
  for (int j = 0; j < xs.cols; ++j) xs(4, j) += 123.0;
  Matrix ys = kernels::softmax_rows(xs);
  for (int j = 0; j < y.cols; ++j)
    CHECK(std::fabs(ys(4, j) - y(4, j)) < 1e-12);
}

TEST_CASE("layer norm handles constant rows via eps") {
  Matrix x(2, 4);
  x.fill(3.5);
  Matrix gamma(1, 4), beta(1, 4);
  gamma.fill(1.0);
  Matrix y = kernels::layer_norm_rows(x, gamma, beta, 1e-5);
  CHECK(all_finite(y));
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("structural helpers") {
  Matrix a(3, 2, {1, 2, 3, 4, 5, 6});
  Matrix g = gather_rows(a, {2, 0, 2});
  CHECK(g == Matrix(3, 2, {5, 6, 1, 2, 5, 6}));
  Matrix s = slice_cols(a, 1, 2);
  CHECK(s == Matrix(3, 1, {2, 4, 6}));
  Matrix cc = concat_cols({a, s});
  CHECK(cc == Matrix(3, 3, {1, 2, 2, 3, 4, 4, 5, 6, 6}));
  Matrix cr = concat_rows({a, a});
  CHECK(cr.rows == 6);
  CHECK(cr(3, 0) == 1);
}
