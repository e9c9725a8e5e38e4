#pragma once

#include <array>
#include <cstdint>

#include "swann/util/rng.hpp"

namespace swann::env {

// Piecewise-constant angular-velocity targets, held 0.5-2 s.
// "small" is the conservative live-flight profile: 90% of holds are
// uniform within +/-50 deg/s per axis, the rest push each axis to
// 100-150 deg/s. "aggressive" is the simulation training profile and
// covers +/-400 deg/s uniformly.
struct SetpointProfile {
  enum class Kind { Aggressive, Small } kind = Kind::Aggressive;
  double hold_min_s = 0.5;
  double hold_max_s = 2.0;
  double aggressive_abs_deg = 400.0;
  double small_abs_deg = 50.0;
  double large_lo_deg = 100.0;
  double large_hi_deg = 150.0;
  double large_prob = 0.1;
};

class SetpointGenerator {
public:
  SetpointGenerator(uint64_t seed, const SetpointProfile& profile, double rate_hz)
      : rng_(seed), profile_(profile), rate_hz_(rate_hz) {
    resample();
  }

  // target for the current tick, deg/s per axis; advances the hold timer
  std::array<double, 3> next() {
    if (hold_left_ == 0) resample();
    hold_left_ -= 1;
    return current_;
  }

  const std::array<double, 3>& current() const { return current_; }

private:
  void resample();

  Rng rng_;
  SetpointProfile profile_;
  double rate_hz_;
  std::array<double, 3> current_{0.0, 0.0, 0.0};
  int hold_left_ = 0;
};

}  // namespace swann::env
