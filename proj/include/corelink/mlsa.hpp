#pragma once

#include "corelink/autodiff.hpp"
#include "corelink/matrix.hpp"
#include "corelink/nn.hpp"
#include "corelink/rng.hpp"

namespace corelink {

struct MlsaConfig {
  int layers = 2;
  int heads = 4;
  int ff_width = 0;  // 0 means 4 * d
  bool positional = false;
  int max_mentions = 512;
};

// Mention-level self-attention: n transformer layers over a document's mention
// representations, full bidirectional attention, no positional encoding by
// default (an ordinal-embedding variant sits behind the positional flag).
// n = 0 is the identity, used by the ablation.
class MlsaStack {
 public:
  MlsaStack() = default;
  MlsaStack(ad::ParamStore& store, const MlsaConfig& cfg, int d, Rng& rng,
            double init_std);

  ad::Var refine(ad::Tape& t, ad::Var reprs) const;
  Matrix refine_values(const Matrix& reprs) const;

  int layers() const { return cfg_.layers; }
  int dim() const { return dim_; }

 private:
  void check_input(int k, int d) const;

  MlsaConfig cfg_;
  int dim_ = 0;
  nn::TransformerStack stack_;
  nn::Embedding ordinal_;
};

}  // namespace corelink
