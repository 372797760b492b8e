#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bce {

// Deterministic random source. std::mt19937_64 has a portable bit stream, but
// the std:: distributions do not, so the few draws we need are implemented
// here to keep seeded runs byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    std::size_t j = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return j < n ? j : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bce
