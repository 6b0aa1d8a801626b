#include "corelink/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace corelink {

double Rng::normal(double mean, double stddev) {
  // Box-Muller on two fresh uniforms. No spare caching so the engine state is
  // the whole RNG state.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& s) {
  std::istringstream is(s);
  is >> engine_;
}

}  // namespace corelink
