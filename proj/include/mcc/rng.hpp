#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mcc {

// Deterministic random source. std::mt19937_64 output is fully specified by
// the standard, and every variate below is derived from raw 64-bit draws, so
// sequences are reproducible across platforms and standard library
// implementations (std::*_distribution would not be).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on (0, 1), never returning an endpoint.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform01()); }

  // Standard normal via Box-Muller; the pair is generated together and the
  // second value cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925287 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n), unbiased (rejection sampling).
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  // Poisson count by inversion of the product of uniforms; O(lambda) time,
  // intended for small rates.
  long poisson(double lambda) {
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mcc
