#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lgr {

/// Deterministic random stream. Wraps std::mt19937_64 but maps raw draws to
/// doubles and bounded ints by hand so that sequences are identical across
/// standard library implementations (the std distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal draw (Box-Muller, second value cached).
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Derives an independent child seed from a base seed and a salt
  /// (splitmix64 finalizer). Used to give every object/epoch its own stream.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace lgr
