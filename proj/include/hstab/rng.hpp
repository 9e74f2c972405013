#pragma once

// Deterministic random numbers. mt19937_64 is bit-exact across platforms;
// the standard distribution adapters are not, so uniforms and normals are
// produced by hand.

#include <cmath>
#include <cstdint>
#include <random>

namespace hstab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // stream splitting: decorrelated child seed for task `id`
  static std::uint64_t split(std::uint64_t seed, std::uint64_t id) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1)
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hstab
