#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace swann::metrics {

// Timestamped evaluation trace: setpoints and measured rates in deg/s,
// motor commands as duty in [0,1], sampled at fs Hz.
struct EvalTrace {
  double fs = 0.0;
  std::vector<std::array<double, 3>> setpoint;
  std::vector<std::array<double, 3>> measured;
  std::vector<std::array<double, 4>> duty;
};

// mean over time and axes of |setpoint - measured|, deg/s
double mae(const EvalTrace& trace);

// mean over time of sum of squared duties (relative electrical-power proxy)
double power_proxy(const EvalTrace& trace);

// DFT of a real signal for arbitrary n (radix-2 plus Bluestein).
std::vector<std::complex<double>> dft(std::span<const double> signal);

struct Spectrum {
  std::vector<double> freq;  // Hz, one-sided, k = 0 .. n/2
  std::vector<double> amp;   // |X_k|
};

Spectrum fft_amplitude(std::span<const double> signal, double fs);

// Frequency-weighted mean amplitude of the mean-removed signal:
// Sm = (2 / (n fs)) * sum_{f_i > 0} A_i f_i. Small for smooth controllers.
// Throws for n < 8.
double smoothness(std::span<const double> signal, double fs);

// mean of per-channel Sm over the duty channels of a trace
double smoothness(const EvalTrace& trace);

}  // namespace swann::metrics
