#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace selftune {

// Deterministic RNG wrapper. std::mt19937_64 is fully specified by the
// standard, but the distribution classes are not, so we map raw draws to
// doubles ourselves. Identical seeds give identical streams on every
// platform, which the experiment harness relies on for reproducible output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on [0, 1): 53 random mantissa bits
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; caches the second deviate
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// splitmix64 finalizer: derives well-separated sub-stream seeds, so the same
// base seed can feed several independent generators (X draw, Y draw, ...)
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace selftune
