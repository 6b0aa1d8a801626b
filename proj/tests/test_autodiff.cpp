#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "corelink/autodiff.hpp"
#include "corelink/matrix.hpp"
#include "corelink/nn.hpp"
#include "corelink/rng.hpp"

using namespace corelink;

namespace {

Matrix random_matrix(Rng& rng, int r, int c, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal(0.0, scale);
  return m;
}

// Central finite differences of f w.r.t. x, against the analytic gradient
// obtained from one tape backward pass. Returns the relative error
// ||fd - an|| / max(||fd||, ||an||, floor).
double fd_check(Matrix x, const std::function<ad::Var(ad::Tape&, ad::Var)>& f,
                double h = 1e-6) {
  ad::Tape tape;
  ad::Var vx = tape.leaf(x);
  ad::Var loss = f(tape, vx);
  tape.backward(loss);
  Matrix analytic = vx.grad();

  Matrix fd(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    ad::Tape tp, tm;
    double lp = f(tp, tp.leaf(xp)).scalar();
    double lm = f(tm, tm.leaf(xm)).scalar();
    fd.data[i] = (lp - lm) / (2 * h);
  }
  double num = 0.0, dfd = 0.0, dan = 0.0;
  for (std::size_t i = 0; i < fd.data.size(); ++i) {
    num += (fd.data[i] - analytic.data[i]) * (fd.data[i] - analytic.data[i]);
    dfd += fd.data[i] * fd.data[i];
    dan += analytic.data[i] * analytic.data[i];
  }
  return std::sqrt(num) / std::max({std::sqrt(dfd), std::sqrt(dan), 1e-8});
}

// Reduce a matrix output to a scalar with a fixed readout column so upstream
// gradients are nontrivial: loss = sum(y * readout).
ad::Var weighted_sum(ad::Tape& t, ad::Var y, const Matrix& readout) {
  return ad::sum_all(ad::matmul(y, t.constant(readout)));
}

}  // namespace

TEST_CASE("finite differences: matmul + add + bias + relu chain") {
  Rng rng(5);
  Matrix x = random_matrix(rng, 4, 3);
  Matrix w = random_matrix(rng, 3, 6);
  Matrix b = random_matrix(rng, 1, 6);
  Matrix readout = random_matrix(rng, 6, 1);

  double err = fd_check(x, [&](ad::Tape& t, ad::Var vx) {
    ad::Var y = ad::relu(ad::add_row_broadcast(ad::matmul(vx, t.constant(w)), t.constant(b)));
    return weighted_sum(t, y, readout);
  });
  CHECK(err < 1e-6);

  // Gradient w.r.t. the weight matrix.
  double werr = fd_check(w, [&](ad::Tape& t, ad::Var vw) {
    ad::Var y = ad::relu(ad::add_row_broadcast(ad::matmul(t.constant(x), vw), t.constant(b)));
    return weighted_sum(t, y, readout);
  });
  CHECK(werr < 1e-6);
}

TEST_CASE("finite differences: matmul_nt and mul_scalar") {
  Rng rng(6);
  Matrix a = random_matrix(rng, 4, 5);
  Matrix b = random_matrix(rng, 3, 5);
  Matrix readout = random_matrix(rng, 3, 1);
  double err = fd_check(a, [&](ad::Tape& t, ad::Var va) {
    return weighted_sum(t, ad::mul_scalar(ad::matmul_nt(va, t.constant(b)), 0.33), readout);
  });
  CHECK(err < 1e-6);
  double berr = fd_check(b, [&](ad::Tape& t, ad::Var vb) {
    return weighted_sum(t, ad::mul_scalar(ad::matmul_nt(t.constant(a), vb), 0.33), readout);
  });
  CHECK(berr < 1e-6);
}

TEST_CASE("finite differences: softmax rows") {
  Rng rng(8);
  Matrix x = random_matrix(rng, 3, 5);
  Matrix readout = random_matrix(rng, 5, 1);
  double err = fd_check(x, [&](ad::Tape& t, ad::Var vx) {
    return weighted_sum(t, ad::softmax_rows(vx), readout);
  });
  CHECK(err < 1e-6);
}

TEST_CASE("finite differences: layer norm") {
  Rng rng(9);
  Matrix x = random_matrix(rng, 4, 6);
  Matrix gamma = random_matrix(rng, 1, 6);
  Matrix beta = random_matrix(rng, 1, 6);
  Matrix readout = random_matrix(rng, 6, 1);

  double xerr = fd_check(x, [&](ad::Tape& t, ad::Var vx) {
    return weighted_sum(t, ad::layer_norm_rows(vx, t.constant(gamma), t.constant(beta), 1e-5), readout);
  });
  CHECK(xerr < 1e-5);
  double gerr = fd_check(gamma, [&](ad::Tape& t, ad::Var vg) {
    return weighted_sum(t, ad::layer_norm_rows(t.constant(x), vg, t.constant(beta), 1e-5), readout);
  });
  CHECK(gerr < 1e-6);
  double berr = fd_check(beta, [&](ad::Tape& t, ad::Var vb) {
    return weighted_sum(t, ad::layer_norm_rows(t.constant(x), t.constant(gamma), vb, 1e-5), readout);
  });
  CHECK(berr < 1e-6);
}

TEST_CASE("finite differences: gather, concat, slice") {
  Rng rng(10);
  Matrix x = random_matrix(rng, 5, 4);
  Matrix readout = random_matrix(rng, 6, 1);
  double err = fd_check(x, [&](ad::Tape& t, ad::Var vx) {
    ad::Var g = ad::gather_rows(vx, {0, 3, 3, 1});
    ad::Var c = ad::concat_cols({g, ad::slice_cols(g, 1, 3)});
    return weighted_sum(t, c, readout);
  });
  CHECK(err < 1e-6);

  Matrix readout2 = random_matrix(rng, 4, 1);
  double err2 = fd_check(x, [&](ad::Tape& t, ad::Var vx) {
    ad::Var r = ad::concat_rows({ad::gather_rows(vx, {1, 2}), ad::gather_rows(vx, {4})});
    return weighted_sum(t, r, readout2);
  });
  CHECK(err2 < 1e-6);
}

TEST_CASE("finite differences: softmax cross entropy") {
  Rng rng(12);
  Matrix logits = random_matrix(rng, 6, 4);
  std::vector<int> targets = {0, 2, 3, 1, 1, 0};
  double err = fd_check(logits, [&](ad::Tape& t, ad::Var vx) {
    return ad::softmax_xent(vx, targets);
  });
  CHECK(err < 1e-6);
}

TEST_CASE("finite differences: coreference NLL") {
  Rng rng(13);
  const int k = 5;
  Matrix sm = random_matrix(rng, k, 1);
  Matrix sa = random_matrix(rng, k * (k - 1) / 2, 1);
  // clusters: {0, 2, 3} and {1, 4}
  std::vector<std::vector<int>> gold = {{}, {}, {0}, {0, 2}, {1}};

  double err_sa = fd_check(sa, [&](ad::Tape& t, ad::Var vsa) {
    return ad::coref_nll(t.leaf(sm), vsa, gold, k);
  });
  CHECK(err_sa < 1e-6);
  double err_sm = fd_check(sm, [&](ad::Tape& t, ad::Var vsm) {
    return ad::coref_nll(vsm, t.leaf(sa), gold, k);
  });
  CHECK(err_sm < 1e-6);

  // Without the mention score term.
  double err_nosm = fd_check(sa, [&](ad::Tape& t, ad::Var vsa) {
    return ad::coref_nll(std::nullopt, vsa, gold, k);
  });
  CHECK(err_nosm < 1e-6);
}

TEST_CASE("finite differences: full transformer layer") {
  Rng rng(14);
  ad::ParamStore store;
  nn::TransformerStack stack = nn::TransformerStack::create(store, "t", 2, 8, 2, 16, rng, 0.3);
  Matrix x = random_matrix(rng, 5, 8);
  Matrix readout = random_matrix(rng, 8, 1);

  double xerr = fd_check(x, [&](ad::Tape& t, ad::Var vx) {
    return weighted_sum(t, stack.apply(t, vx), readout);
  });
  CHECK(xerr < 1e-5);

  // Analytic gradient via param store vs finite differences, for every
  // parameter of the stack.
  store.zero_grads();
  {
    ad::Tape t;
    ad::Var out = stack.apply(t, t.constant(x));
    t.backward(weighted_sum(t, out, readout));
  }
  const double h = 1e-6;
  for (const auto& up : store.items()) {
    ad::Parameter* p = up.get();
    double num = 0.0, dfd = 0.0, dan = 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value.data[i];
      p->value.data[i] = orig + h;
      ad::Tape tp;
      double lp = weighted_sum(tp, stack.apply(tp, tp.constant(x)), readout).scalar();
      p->value.data[i] = orig - h;
      ad::Tape tm;
      double lm = weighted_sum(tm, stack.apply(tm, tm.constant(x)), readout).scalar();
      p->value.data[i] = orig;
      const double fd = (lp - lm) / (2 * h);
      const double an = p->grad.data[i];
      num += (fd - an) * (fd - an);
      dfd += fd * fd;
      dan += an * an;
    }
    // Attention key biases have a structurally zero gradient (softmax shift
    // invariance); both sides are then pure rounding noise, so skip.
    if (std::sqrt(dfd) < 1e-6 && std::sqrt(dan) < 1e-6) continue;
    const double rel = std::sqrt(num) / std::max({std::sqrt(dfd), std::sqrt(dan), 1e-8});
    INFO(p->name);
    CHECK(rel < 1e-5);
  }
}

TEST_CASE("tape forward equals pure forward") {
  Rng rng(21);
  ad::ParamStore store;
  nn::TransformerStack stack = nn::TransformerStack::create(store, "s", 3, 12, 4, 24, rng, 0.2);
  nn::FeedForward ff = nn::FeedForward::create(store, "ff", 12, 7, 3, rng, 0.2);
  Matrix x = random_matrix(rng, 9, 12);

  ad::Tape t;
  ad::Var out = ff.apply(t, stack.apply(t, t.constant(x)));
  Matrix pure = ff.forward(stack.forward(x));
  CHECK(max_abs_diff(out.value(), pure) == 0.0);
}

TEST_CASE("shared parameter accumulates gradient from multiple uses") {
  Rng rng(22);
  ad::ParamStore store;
  nn::Linear lin = nn::Linear::create(store, "lin", 3, 3, rng, 0.5);
  Matrix x1 = random_matrix(rng, 2, 3);
  Matrix x2 = random_matrix(rng, 4, 3);
  Matrix r1 = random_matrix(rng, 3, 1);

  store.zero_grads();
  {
    ad::Tape t;
    ad::Var y1 = lin.apply(t, t.constant(x1));
    ad::Var y2 = lin.apply(t, t.constant(x2));
    ad::Var loss = ad::add(weighted_sum(t, y1, r1), weighted_sum(t, y2, r1));
    t.backward(loss);
  }
  Matrix combined = lin.w->grad;

  store.zero_grads();
  {
    ad::Tape t;
    t.backward(weighted_sum(t, lin.apply(t, t.constant(x1)), r1));
  }
  Matrix g1 = lin.w->grad;
  store.zero_grads();
  {
    ad::Tape t;
    t.backward(weighted_sum(t, lin.apply(t, t.constant(x2)), r1));
  }
  Matrix g2 = lin.w->grad;

  for (std::size_t i = 0; i < combined.data.size(); ++i)
    CHECK(std::fabs(combined.data[i] - (g1.data[i] + g2.data[i])) < 1e-12);
}
