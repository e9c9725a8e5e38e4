#include "swann/env/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swann::env {

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(theta + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  return w - pi;
}

PendulumConfig pendulum_real_twin(const PendulumConfig& cfg) {
  PendulumConfig twin = cfg;
  twin.target_angle = -cfg.target_angle;
  return twin;
}

std::vector<double> Pendulum::reset(uint64_t seed) {
  rng_ = Rng(seed);
  theta_ = rng_.uniform(-std::numbers::pi, std::numbers::pi);
  theta_dot_ = rng_.uniform(-1.0, 1.0);
  step_count_ = 0;
  return observe();
}

void Pendulum::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
}

double Pendulum::mechanical_energy() const {
  const double m = cfg_.mass, l = cfg_.length, g = cfg_.gravity;
  return (m * l * l / 6.0) * theta_dot_ * theta_dot_ +
         (m * g * l / 2.0) * std::cos(theta_);
}

StepResult Pendulum::step(std::span<const double> action) {
  if (action.size() != 1)
    throw std::invalid_argument("pendulum: action must be scalar");
  const double a = std::clamp(action[0], -1.0, 1.0);
  const double u = a * cfg_.max_torque;

  const double m = cfg_.mass, l = cfg_.length, g = cfg_.gravity;
  const double acc =
      (3.0 * g / (2.0 * l)) * std::sin(theta_) + (3.0 / (m * l * l)) * u;
  theta_dot_ += cfg_.dt * acc;
  theta_dot_ = std::clamp(theta_dot_, -cfg_.max_speed, cfg_.max_speed);
  theta_ += cfg_.dt * theta_dot_;

  if (!std::isfinite(theta_) || !std::isfinite(theta_dot_))
    throw std::runtime_error("pendulum: non-finite state");

  const double e = wrap_angle(theta_ - cfg_.target_angle);
  const double cost = e * e + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

  StepResult r;
  r.reward = std::exp(-cost);
  step_count_ += 1;
  r.done = step_count_ >= cfg_.episode_len;
  r.obs = observe();
  return r;
}

std::vector<double> Pendulum::observe() const {
  return {std::cos(theta_), std::sin(theta_), theta_dot_, cfg_.target_angle};
}

}  // namespace swann::env
