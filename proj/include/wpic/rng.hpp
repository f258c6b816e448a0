#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace wpic {

// Seeded random stream with sampling routines that depend only on the raw
// mt19937_64 output, so identical seeds give bit-identical draws on any
// platform (std::normal_distribution makes no such guarantee).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly-symmetric complex Gaussian with unit variance (E|z|^2 = 1).
  std::complex<double> complex_gaussian() {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    double re = gaussian();
    double im = gaussian();
    return {re * inv_sqrt2, im * inv_sqrt2};
  }

  // Unit-modulus complex number with uniform phase.
  std::complex<double> random_phase() {
    double a = 2.0 * std::numbers::pi * uniform();
    return {std::cos(a), std::sin(a)};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// FNV-1a over raw bytes; used to derive stable per-trial seeds so that
// extending a sweep never reshuffles existing trials.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t hash_combine(std::uint64_t h, double v) {
  return fnv1a64(&v, sizeof(v), h);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return fnv1a64(&v, sizeof(v), h);
}

}  // namespace wpic
