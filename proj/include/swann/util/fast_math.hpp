#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>

namespace swann {

// exp/tanh replacements for the dense-layer hot path. Branch-free so the
// per-neuron activation loops auto-vectorize; accuracy is ~1e-13 relative
// (tested against libm), far below the float32 weight quantization.

inline double fast_exp(double x) {
  // 2^k * e^f with x = k*ln2 + f, |f| <= ln2/2; e^f by degree-11 Taylor
  constexpr double ln2 = 0.6931471805599453;
  constexpr double inv_ln2 = 1.4426950408889634;
  if (x > 700.0) x = 700.0;
  if (x < -690.0) return 0.0;  // keeps the exponent-bit trick clear of denormals
  const double kd = std::nearbyint(x * inv_ln2);
  const double f = x - kd * ln2;
  double p = 1.0 / 39916800.0;  // 1/11!
  p = p * f + 1.0 / 3628800.0;
  p = p * f + 1.0 / 362880.0;
  p = p * f + 1.0 / 40320.0;
  p = p * f + 1.0 / 5040.0;
  p = p * f + 1.0 / 720.0;
  p = p * f + 1.0 / 120.0;
  p = p * f + 1.0 / 24.0;
  p = p * f + 1.0 / 6.0;
  p = p * f + 0.5;
  p = p * f + 1.0;
  p = p * f + 1.0;
  const auto k = static_cast<int64_t>(kd);
  uint64_t bits;
  std::memcpy(&bits, &p, 8);
  bits += static_cast<uint64_t>(k) << 52;
  std::memcpy(&p, &bits, 8);
  return p;
}

inline double fast_tanh(double x) {
  const double ax = std::fabs(x) > 19.0 ? 19.0 : std::fabs(x);
  const double e = fast_exp(-2.0 * ax);
  const double t = (1.0 - e) / (1.0 + e);
  return std::copysign(t, x);
}

}  // namespace swann
