#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace corelink {

// Seeded RNG with platform-independent draws. std::mt19937_64 itself is fully
// specified by the standard, but the std distributions are not, so uniform and
// normal variates are derived here directly from the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    if (lo >= hi) return lo;
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; draws two uniforms per call, returns one variate.
  double normal(double mean = 0.0, double stddev = 1.0);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(0, i);
      std::swap(v[i], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform_int(0, static_cast<int>(v.size()) - 1)];
  }

  // Textual engine state; round-trips exactly.
  std::string state() const;
  void restore(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

}  // namespace corelink
