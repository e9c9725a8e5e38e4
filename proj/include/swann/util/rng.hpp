#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace swann {

// mt19937_64 with explicit sampling methods so draw sequences are
// independent of libstdc++ distribution internals (normal_distribution
// caches a spare value, which makes copied generators diverge).
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  uint64_t index(uint64_t n) {
    return static_cast<uint64_t>(uniform() * static_cast<double>(n));
  }

  // standard normal via Box-Muller, no cached spare
  double gauss() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double gauss(double mean, double std) { return mean + std * gauss(); }

  bool bernoulli(double p) { return uniform() < p; }

  // independent child stream, keyed so reordering call sites is harmless
  Rng fork(uint64_t key) {
    return Rng(gen_() ^ (0x9e3779b97f4a7c15ULL * (key + 1)));
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace swann
