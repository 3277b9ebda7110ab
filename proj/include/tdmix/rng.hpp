#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tdmix {

// Deterministic sampling stack on top of the raw mt19937_64 stream.
//
// The standard pins the mt19937_64 output sequence but leaves
// std::*_distribution and std::shuffle implementation-defined, which would
// break byte-identical reruns across standard libraries. Every draw here is
// derived from raw engine words with fixed algorithms:
//   unit uniform  (x >> 11) * 2^-53
//   bounded int   rejection sampling on the high bits
//   normal        Box-Muller
//   gamma         Marsaglia-Tsang for alpha >= 1, boosted by U^(1/alpha)
//                 for alpha < 1
//   beta(a,b)     G1 / (G1 + G2) with independent gamma draws
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double next_unit_open() { return 1.0 - next_unit(); }

  // Uniform integer in [0, n). Unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (one value per uniform pair).
  double next_normal() {
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Gamma(alpha, 1), alpha > 0.
  double next_gamma(double alpha) {
    assert(alpha > 0.0);
    if (alpha < 1.0) {
      const double boost = std::pow(next_unit_open(), 1.0 / alpha);
      return next_gamma(alpha + 1.0) * boost;
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_unit_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v;
      }
    }
  }

  // Beta(a, b) on [0, 1].
  double next_beta(double a, double b) {
    for (;;) {
      const double g1 = next_gamma(a);
      const double g2 = next_gamma(b);
      const double sum = g1 + g2;
      if (sum > 0.0) return g1 / sum;
    }
  }

  // Fisher-Yates in-place shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tdmix
