#ifndef STAB_RNG_HPP
#define STAB_RNG_HPP

#include <cstdint>
#include <random>

#include "stab/common.hpp"

namespace stab {

/// Deterministic random source: mt19937_64 with hand-rolled distributions,
/// so identical seeds reproduce identical streams on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0,1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, explicit for reproducibility
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec normal_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  /// Uniform sample in the closed ball of the given radius.
  Vec in_ball(Index dim, double radius) {
    Vec dir = normal_vec(dim);
    const double nrm = dir.norm();
    if (nrm == 0) return Vec::Zero(dim);
    const double u = std::pow(uniform(), 1.0 / static_cast<double>(dim));
    return (radius * u / nrm) * dir;
  }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Stable per-sample seed derivation (splitmix64 of seed and index).
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace stab

#endif  // STAB_RNG_HPP
