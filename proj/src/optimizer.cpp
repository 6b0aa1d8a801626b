#include "corelink/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace corelink {

void Adam::step(ad::ParamStore& params, double lr_scale) {
  ++t_;
  const double lr = cfg_.lr * lr_scale;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (const auto& up : params.items()) {
    ad::Parameter& p = *up;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data[i];
      p.m.data[i] = cfg_.beta1 * p.m.data[i] + (1.0 - cfg_.beta1) * g;
      p.v.data[i] = cfg_.beta2 * p.v.data[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = p.m.data[i] / bc1;
      const double vhat = p.v.data[i] / bc2;
      p.value.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double warmup_scale(double warmup_frac, std::int64_t step, std::int64_t total_steps) {
  const std::int64_t warm =
      static_cast<std::int64_t>(warmup_frac * static_cast<double>(total_steps));
  if (warm <= 0 || step >= warm) return 1.0;
  return static_cast<double>(step + 1) / static_cast<double>(warm);
}

}  // namespace corelink
