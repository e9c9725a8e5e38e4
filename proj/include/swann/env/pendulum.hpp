#pragma once

#include <cstdint>

#include "swann/env/env.hpp"
#include "swann/util/rng.hpp"

namespace swann::env {

struct PendulumConfig {
  double gravity = 10.0;       // m/s^2
  double mass = 1.0;           // kg
  double length = 1.0;         // m
  double dt = 0.05;            // s
  double max_torque = 2.0;     // N*m
  double max_speed = 8.0;      // rad/s
  double target_angle = 0.0;   // alpha, radians; 0 is upright
  int episode_len = 200;
};

// Flips the lean target (Domain A <-> Domain B).
PendulumConfig pendulum_real_twin(const PendulumConfig& cfg);

double wrap_angle(double theta);  // to (-pi, pi]

// Torque-controlled rigid pendulum, theta = 0 pointing up. Action is a
// scalar in [-1, 1] scaled to [-max_torque, max_torque]. Observation is
// (cos theta, sin theta, theta_dot, target_angle). Reward
// exp(-(wrap(theta - alpha)^2 + 0.1 theta_dot^2 + 0.001 u^2)) in (0, 1].
class Pendulum final : public Env {
public:
  explicit Pendulum(const PendulumConfig& cfg) : cfg_(cfg), rng_(0) {}

  int obs_size() const override { return 4; }
  int act_size() const override { return 1; }
  std::vector<double> reset(uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  void set_state(double theta, double theta_dot);
  // (1/6) m l^2 w^2 + (m g l / 2) cos(theta), for the drift regression
  double mechanical_energy() const;
  const PendulumConfig& config() const { return cfg_; }

private:
  std::vector<double> observe() const;

  PendulumConfig cfg_;
  Rng rng_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
  int step_count_ = 0;
};

}  // namespace swann::env
