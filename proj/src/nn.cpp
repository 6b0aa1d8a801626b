#include "corelink/nn.hpp"

#include <cmath>

#include "corelink/kernels.hpp"

namespace corelink::nn {

void init_normal(Matrix& m, Rng& rng, double stddev) {
  for (double& v : m.data) v = rng.normal(0.0, stddev);
}

Linear Linear::create(ad::ParamStore& store, const std::string& name, int in,
                      int out, Rng& rng, double init_std) {
  Linear l;
  l.w = store.create(name + ".w", in, out);
  l.b = store.create(name + ".b", 1, out);
  init_normal(l.w->value, rng, init_std);
  return l;
}

ad::Var Linear::apply(ad::Tape& t, ad::Var x) const {
  return ad::add_row_broadcast(ad::matmul(x, t.param(*w)), t.param(*b));
}

Matrix Linear::forward(const Matrix& x) const {
  return kernels::add_row_broadcast(kernels::matmul(x, w->value), b->value);
}

FeedForward FeedForward::create(ad::ParamStore& store, const std::string& name,
                                int in, int hidden, int out, Rng& rng,
                                double init_std) {
  FeedForward f;
  f.fc1 = Linear::create(store, name + ".fc1", in, hidden, rng, init_std);
  f.fc2 = Linear::create(store, name + ".fc2", hidden, out, rng, init_std);
  return f;
}

ad::Var FeedForward::apply(ad::Tape& t, ad::Var x) const {
  return fc2.apply(t, ad::relu(fc1.apply(t, x)));
}

Matrix FeedForward::forward(const Matrix& x) const {
  return fc2.forward(kernels::relu(fc1.forward(x)));
}

LayerNorm LayerNorm::create(ad::ParamStore& store, const std::string& name, int d) {
  LayerNorm ln;
  ln.gamma = store.create(name + ".gamma", 1, d);
  ln.beta = store.create(name + ".beta", 1, d);
  ln.gamma->value.fill(1.0);
  return ln;
}

ad::Var LayerNorm::apply(ad::Tape& t, ad::Var x) const {
  return ad::layer_norm_rows(x, t.param(*gamma), t.param(*beta), eps);
}

Matrix LayerNorm::forward(const Matrix& x) const {
  return kernels::layer_norm_rows(x, gamma->value, beta->value, eps);
}

MultiHeadSelfAttention MultiHeadSelfAttention::create(ad::ParamStore& store,
                                                      const std::string& name,
                                                      int d, int heads, Rng& rng,
                                                      double init_std) {
  MultiHeadSelfAttention a;
  a.heads = heads;
  a.wq = Linear::create(store, name + ".wq", d, d, rng, init_std);
  a.wk = Linear::create(store, name + ".wk", d, d, rng, init_std);
  a.wv = Linear::create(store, name + ".wv", d, d, rng, init_std);
  a.wo = Linear::create(store, name + ".wo", d, d, rng, init_std);
  return a;
}

ad::Var MultiHeadSelfAttention::apply(ad::Tape& t, ad::Var x) const {
  const int d = wq.out_dim();
  const int dh = d / heads;
  ad::Var q = wq.apply(t, x), k = wk.apply(t, x), v = wv.apply(t, x);
  std::vector<ad::Var> outs;
  outs.reserve(heads);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    ad::Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    ad::Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    ad::Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    ad::Var scores = ad::mul_scalar(ad::matmul_nt(qh, kh), inv_sqrt);
    ad::Var probs = ad::softmax_rows(scores);
    outs.push_back(ad::matmul(probs, vh));
  }
  ad::Var merged = heads == 1 ? outs[0] : ad::concat_cols(outs);
  return wo.apply(t, merged);
}

Matrix MultiHeadSelfAttention::forward(const Matrix& x) const {
  const int d = wq.out_dim();
  const int dh = d / heads;
  Matrix q = wq.forward(x), k = wk.forward(x), v = wv.forward(x);
  std::vector<Matrix> outs;
  outs.reserve(heads);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    Matrix qh = slice_cols(q, h * dh, (h + 1) * dh);
    Matrix kh = slice_cols(k, h * dh, (h + 1) * dh);
    Matrix vh = slice_cols(v, h * dh, (h + 1) * dh);
    Matrix probs = kernels::softmax_rows(kernels::scale(kernels::matmul_nt(qh, kh), inv_sqrt));
    outs.push_back(kernels::matmul(probs, vh));
  }
  Matrix merged = heads == 1 ? outs[0] : concat_cols(outs);
  return wo.forward(merged);
}

TransformerLayer TransformerLayer::create(ad::ParamStore& store,
                                          const std::string& name, int d,
                                          int heads, int ff_width, Rng& rng,
                                          double init_std) {
  TransformerLayer l;
  l.ln1 = LayerNorm::create(store, name + ".ln1", d);
  l.attn = MultiHeadSelfAttention::create(store, name + ".attn", d, heads, rng, init_std);
  l.ln2 = LayerNorm::create(store, name + ".ln2", d);
  l.ff = FeedForward::create(store, name + ".ff", d, ff_width, d, rng, init_std);
  return l;
}

ad::Var TransformerLayer::apply(ad::Tape& t, ad::Var x) const {
  x = ad::add(x, attn.apply(t, ln1.apply(t, x)));
  x = ad::add(x, ff.apply(t, ln2.apply(t, x)));
  return x;
}

Matrix TransformerLayer::forward(const Matrix& x) const {
  Matrix y = kernels::add(x, attn.forward(ln1.forward(x)));
  return kernels::add(y, ff.forward(ln2.forward(y)));
}

TransformerStack TransformerStack::create(ad::ParamStore& store,
                                          const std::string& name, int n_layers,
                                          int d, int heads, int ff_width,
                                          Rng& rng, double init_std) {
  TransformerStack s;
  for (int i = 0; i < n_layers; ++i)
    s.layers.push_back(TransformerLayer::create(
        store, name + ".l" + std::to_string(i), d, heads, ff_width, rng, init_std));
  return s;
}

ad::Var TransformerStack::apply(ad::Tape& t, ad::Var x) const {
  for (const TransformerLayer& l : layers) x = l.apply(t, x);
  return x;
}

Matrix TransformerStack::forward(const Matrix& x) const {
  Matrix y = x;
  for (const TransformerLayer& l : layers) y = l.forward(y);
  return y;
}

Embedding Embedding::create(ad::ParamStore& store, const std::string& name,
                            int n, int d, Rng& rng, double init_std) {
  Embedding e;
  e.table = store.create(name, n, d);
  init_normal(e.table->value, rng, init_std);
  return e;
}

ad::Var Embedding::apply(ad::Tape& t, const std::vector<int>& ids) const {
  return ad::gather_rows(t.param(*table), ids);
}

Matrix Embedding::forward(const std::vector<int>& ids) const {
  return gather_rows(table->value, ids);
}

}  // namespace corelink::nn
