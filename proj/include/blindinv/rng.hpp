// Seeded random generation with explicit inverse-CDF / Box-Muller sampling so
// streams are reproducible independent of the standard library.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace blindinv {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Derive an independent substream; splitmix-style mixing of the label.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (label + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01() {
    return double(eng_() >> 11) * 0x1.0p-53;  // in [0,1)
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    // Box-Muller; consumes two uniforms per call to keep streams simple.
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double laplace(double scale = 1.0) {
    double u = uniform01() - 0.5;
    double v = std::max(1e-300, 1.0 - 2.0 * std::abs(u));
    return (u < 0 ? -1.0 : 1.0) * -scale * std::log(v);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace blindinv
