#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "swann/nn/mlp.hpp"

namespace oracle {

// Second forward implementation: unpacks the flat parameter vector into
// explicit per-layer matrices, multiplies with libm tanh.
inline std::vector<double> reference_forward(const swann::nn::Mlp& net,
                                             std::span<const double> input) {
  std::vector<double> x(input.begin(), input.end());
  size_t off = 0;
  const int layers = static_cast<int>(net.layer_sizes.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int nin = net.layer_sizes[l];
    const int nout = net.layer_sizes[l + 1];
    std::vector<std::vector<double>> w(nout, std::vector<double>(nin));
    for (int j = 0; j < nout; ++j)
      for (int i = 0; i < nin; ++i) w[j][i] = net.params[off + j * nin + i];
    std::vector<double> bias(nout);
    for (int j = 0; j < nout; ++j) bias[j] = net.params[off + nout * nin + j];
    off += static_cast<size_t>(nin) * nout + nout;

    std::vector<double> y(nout);
    for (int j = 0; j < nout; ++j) {
      double acc = bias[j];
      for (int i = 0; i < nin; ++i) acc += w[j][i] * x[i];
      y[j] = acc;
    }
    const bool out_layer = (l == layers - 1);
    const bool tanh_act =
        !out_layer || net.output_act == swann::nn::Activation::Tanh;
    if (tanh_act)
      for (auto& v : y) v = std::tanh(v);
    x = std::move(y);
  }
  return x;
}

// Central finite differences over the float32 parameter vector. The
// denominator uses the actually-representable perturbed values, so the
// only error left is O(h^2) truncation.
inline std::vector<double> fd_gradient(swann::nn::Mlp& net,
                                       const std::function<double()>& loss,
                                       double h = 1e-4) {
  std::vector<double> grad(net.params.size());
  for (size_t i = 0; i < net.params.size(); ++i) {
    const float saved = net.params[i];
    const float wp = static_cast<float>(static_cast<double>(saved) + h);
    const float wm = static_cast<float>(static_cast<double>(saved) - h);
    net.params[i] = wp;
    const double lp = loss();
    net.params[i] = wm;
    const double lm = loss();
    net.params[i] = saved;
    grad[i] = (lp - lm) /
              (static_cast<double>(wp) - static_cast<double>(wm));
  }
  return grad;
}

// max relative error over coordinates with |reference| above `floor`
inline double max_rel_err(std::span<const double> got,
                          std::span<const double> want, double floor = 1e-6) {
  double worst = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    const double denom = std::max(std::fabs(want[i]), std::fabs(got[i]));
    if (denom <= floor) continue;
    worst = std::max(worst, std::fabs(got[i] - want[i]) / denom);
  }
  return worst;
}

// O(n^2) direct DFT
inline std::vector<std::complex<double>> direct_dft(
    std::span<const double> x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                         static_cast<double>(j) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// bit-by-bit CRC-32 of the reflected 0x04C11DB7 polynomial
inline uint32_t bitwise_crc32(std::span<const uint8_t> data) {
  uint32_t crc = 0xFFFFFFFFu;
  for (uint8_t byte : data) {
    crc ^= byte;
    for (int k = 0; k < 8; ++k)
      crc = (crc & 1u) ? (crc >> 1) ^ 0xEDB88320u : crc >> 1;
  }
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace oracle
