#pragma once

#include <cstdint>

#include "corelink/autodiff.hpp"

namespace corelink {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction; iterates parameters in creation order so updates
// are reproducible.
class Adam {
 public:
  explicit Adam(const AdamConfig& cfg) : cfg_(cfg) {}

  // One update from the accumulated gradients; lr_scale multiplies the base
  // learning rate (the warmup schedule feeds this).
  void step(ad::ParamStore& params, double lr_scale = 1.0);

  std::int64_t steps() const { return t_; }
  void set_steps(std::int64_t t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
};

// Linear warmup over the first warmup_frac of total steps, then constant.
double warmup_scale(double warmup_frac, std::int64_t step, std::int64_t total_steps);

}  // namespace corelink
