#include "corelink/mlsa.hpp"

#include <numeric>

#include "corelink/errors.hpp"
#include "corelink/kernels.hpp"

namespace corelink {

MlsaStack::MlsaStack(ad::ParamStore& store, const MlsaConfig& cfg, int d,
                     Rng& rng, double init_std)
    : cfg_(cfg), dim_(d) {
  if (cfg.layers < 0) throw ConfigError("mlsa.layers must be >= 0");
  if (cfg.layers > 0 && d % cfg.heads != 0)
    throw ConfigError("mlsa.heads must divide the representation dimension");
  const int ff = cfg.ff_width > 0 ? cfg.ff_width : 4 * d;
  stack_ = nn::TransformerStack::create(store, "mlsa", cfg.layers, d, cfg.heads,
                                        ff, rng, init_std);
  if (cfg.positional)
    ordinal_ = nn::Embedding::create(store, "mlsa.ordinal", cfg.max_mentions, d,
                                     rng, init_std);
}

void MlsaStack::check_input(int k, int d) const {
  if (k < 1) throw ValidationError("mlsa expects at least one mention");
  if (d != dim_)
    throw ConfigError("mlsa configured for dimension " + std::to_string(dim_) +
                      " but received " + std::to_string(d));
  if (cfg_.positional && k > cfg_.max_mentions)
    throw ConfigError("document has " + std::to_string(k) +
                      " mentions, above mlsa.max_mentions (" +
                      std::to_string(cfg_.max_mentions) + ")");
}

ad::Var MlsaStack::refine(ad::Tape& t, ad::Var reprs) const {
  check_input(reprs.rows(), reprs.cols());
  ad::Var x = reprs;
  if (cfg_.positional) {
    std::vector<int> ids(reprs.rows());
    std::iota(ids.begin(), ids.end(), 0);
    x = ad::add(x, ordinal_.apply(t, ids));
  }
  return stack_.apply(t, x);
}

Matrix MlsaStack::refine_values(const Matrix& reprs) const {
  check_input(reprs.rows, reprs.cols);
  Matrix x = reprs;
  if (cfg_.positional) {
    std::vector<int> ids(reprs.rows);
    std::iota(ids.begin(), ids.end(), 0);
    x = kernels::add(x, ordinal_.forward(ids));
  }
  return stack_.forward(x);
}

}  // namespace corelink
