#pragma once

#include <string>
#include <vector>

#include "corelink/autodiff.hpp"
#include "corelink/matrix.hpp"
#include "corelink/rng.hpp"

namespace corelink::nn {

void init_normal(Matrix& m, Rng& rng, double stddev);

struct Linear {
  ad::Parameter* w = nullptr;  // in x out
  ad::Parameter* b = nullptr;  // 1 x out

  static Linear create(ad::ParamStore& store, const std::string& name, int in,
                       int out, Rng& rng, double init_std);
  ad::Var apply(ad::Tape& t, ad::Var x) const;
  Matrix forward(const Matrix& x) const;
  int in_dim() const { return w->value.rows; }
  int out_dim() const { return w->value.cols; }
};

// Two fully connected layers with a ReLU between them.
struct FeedForward {
  Linear fc1, fc2;

  static FeedForward create(ad::ParamStore& store, const std::string& name,
                            int in, int hidden, int out, Rng& rng,
                            double init_std);
  ad::Var apply(ad::Tape& t, ad::Var x) const;
  Matrix forward(const Matrix& x) const;
};

struct LayerNorm {
  ad::Parameter* gamma = nullptr;  // 1 x d
  ad::Parameter* beta = nullptr;   // 1 x d
  double eps = 1e-5;

  static LayerNorm create(ad::ParamStore& store, const std::string& name, int d);
  ad::Var apply(ad::Tape& t, ad::Var x) const;
  Matrix forward(const Matrix& x) const;
};

struct MultiHeadSelfAttention {
  Linear wq, wk, wv, wo;
  int heads = 1;

  static MultiHeadSelfAttention create(ad::ParamStore& store,
                                       const std::string& name, int d, int heads,
                                       Rng& rng, double init_std);
  ad::Var apply(ad::Tape& t, ad::Var x) const;
  Matrix forward(const Matrix& x) const;
};

// Pre-norm residual block: x += attn(ln1(x)); x += ff(ln2(x)).
struct TransformerLayer {
  LayerNorm ln1, ln2;
  MultiHeadSelfAttention attn;
  FeedForward ff;

  static TransformerLayer create(ad::ParamStore& store, const std::string& name,
                                 int d, int heads, int ff_width, Rng& rng,
                                 double init_std);
  ad::Var apply(ad::Tape& t, ad::Var x) const;
  Matrix forward(const Matrix& x) const;
};

struct TransformerStack {
  std::vector<TransformerLayer> layers;

  static TransformerStack create(ad::ParamStore& store, const std::string& name,
                                 int n_layers, int d, int heads, int ff_width,
                                 Rng& rng, double init_std);
  ad::Var apply(ad::Tape& t, ad::Var x) const;
  Matrix forward(const Matrix& x) const;
};

struct Embedding {
  ad::Parameter* table = nullptr;  // n x d

  static Embedding create(ad::ParamStore& store, const std::string& name, int n,
                          int d, Rng& rng, double init_std);
  ad::Var apply(ad::Tape& t, const std::vector<int>& ids) const;
  Matrix forward(const std::vector<int>& ids) const;
  int size() const { return table->value.rows; }
  int dim() const { return table->value.cols; }
};

}  // namespace corelink::nn
