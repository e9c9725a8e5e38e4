#include "swann/metrics/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swann::metrics {

double mae(const EvalTrace& trace) {
  if (trace.setpoint.size() != trace.measured.size())
    throw std::invalid_argument("mae: trace length mismatch");
  if (trace.setpoint.empty()) return 0.0;
  double acc = 0.0;
  for (size_t t = 0; t < trace.setpoint.size(); ++t)
    for (int i = 0; i < 3; ++i)
      acc += std::fabs(trace.setpoint[t][i] - trace.measured[t][i]);
  return acc / (3.0 * static_cast<double>(trace.setpoint.size()));
}

double power_proxy(const EvalTrace& trace) {
  if (trace.duty.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& d : trace.duty)
    for (int i = 0; i < 4; ++i) acc += d[i] * d[i];
  return acc / static_cast<double>(trace.duty.size());
}

namespace {

using cplx = std::complex<double>;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// in-place iterative radix-2 Cooley-Tukey; inverse applies conj trick outside
void fft_pow2(std::vector<cplx>& x, bool inverse) {
  const size_t n = x.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const cplx u = x[i + k];
        const cplx v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : x) v /= static_cast<double>(n);
}

// Bluestein chirp-z for arbitrary n
std::vector<cplx> dft_bluestein(std::span<const double> sig) {
  const size_t n = sig.size();
  size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  // chirp w_j = exp(-i pi j^2 / n); j^2 taken mod 2n (w has period 2n)
  std::vector<cplx> w(n);
  for (size_t j = 0; j < n; ++j) {
    const auto j2 = static_cast<uint64_t>(j) * j % (2 * n);
    const double ang = -std::numbers::pi * static_cast<double>(j2) /
                       static_cast<double>(n);
    w[j] = cplx(std::cos(ang), std::sin(ang));
  }
  std::vector<cplx> a(m, cplx(0, 0)), b(m, cplx(0, 0));
  for (size_t j = 0; j < n; ++j) a[j] = sig[j] * w[j];
  b[0] = std::conj(w[0]);
  for (size_t j = 1; j < n; ++j) b[j] = b[m - j] = std::conj(w[j]);
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (size_t j = 0; j < m; ++j) a[j] *= b[j];
  fft_pow2(a, true);
  std::vector<cplx> out(n);
  for (size_t k = 0; k < n; ++k) out[k] = a[k] * w[k];
  return out;
}

}  // namespace

std::vector<cplx> dft(std::span<const double> signal) {
  const size_t n = signal.size();
  if (n == 0) return {};
  if (is_pow2(n)) {
    std::vector<cplx> x(n);
    for (size_t i = 0; i < n; ++i) x[i] = cplx(signal[i], 0.0);
    fft_pow2(x, false);
    return x;
  }
  return dft_bluestein(signal);
}

Spectrum fft_amplitude(std::span<const double> signal, double fs) {
  const auto x = dft(signal);
  const size_t n = x.size();
  Spectrum out;
  const size_t half = n / 2;
  out.freq.resize(half + 1);
  out.amp.resize(half + 1);
  for (size_t k = 0; k <= half; ++k) {
    out.freq[k] = fs * static_cast<double>(k) / static_cast<double>(n);
    out.amp[k] = std::abs(x[k]);
  }
  return out;
}

double smoothness(std::span<const double> signal, double fs) {
  const size_t n = signal.size();
  if (n < 8) throw std::invalid_argument("smoothness: need >= 8 samples");
  if (fs <= 0.0) throw std::invalid_argument("smoothness: fs must be > 0");
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (size_t i = 0; i < n; ++i) centered[i] = signal[i] - mean;
  const auto spec = fft_amplitude(centered, fs);
  double acc = 0.0;
  for (size_t k = 1; k < spec.freq.size(); ++k)
    acc += spec.amp[k] * spec.freq[k];
  return 2.0 * acc / (static_cast<double>(n) * fs);
}

double smoothness(const EvalTrace& trace) {
  if (trace.duty.empty()) return 0.0;
  std::vector<double> chan(trace.duty.size());
  double acc = 0.0;
  for (int c = 0; c < 4; ++c) {
    for (size_t t = 0; t < trace.duty.size(); ++t) chan[t] = trace.duty[t][c];
    acc += smoothness(chan, trace.fs);
  }
  return acc / 4.0;
}

}  // namespace swann::metrics
