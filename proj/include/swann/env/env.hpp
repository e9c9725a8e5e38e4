#pragma once

#include <span>
#include <vector>

namespace swann::env {

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
};

// Single-threaded state machine; one instance per rollout worker.
class Env {
public:
  virtual ~Env() = default;
  virtual int obs_size() const = 0;
  virtual int act_size() const = 0;
  virtual std::vector<double> reset(uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
};

}  // namespace swann::env
