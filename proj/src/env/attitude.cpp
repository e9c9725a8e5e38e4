#include "swann/env/attitude.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swann::env {

namespace {
constexpr double kDeg2Rad = 0.017453292519943295;
constexpr double kRad2Deg = 57.29577951308232;

// Differential mixer rows (roll, pitch, yaw); common-mode duty cancels.
constexpr double kMixer[3][4] = {
    {+0.5, -0.5, +0.5, -0.5},
    {+0.5, +0.5, -0.5, -0.5},
    {+0.5, -0.5, -0.5, +0.5},
};
}  // namespace

void SetpointGenerator::resample() {
  const double hold_s = rng_.uniform(profile_.hold_min_s, profile_.hold_max_s);
  hold_left_ = std::max(1, static_cast<int>(hold_s * rate_hz_));
  if (profile_.kind == SetpointProfile::Kind::Aggressive) {
    for (auto& v : current_)
      v = rng_.uniform(-profile_.aggressive_abs_deg, profile_.aggressive_abs_deg);
  } else {
    const bool large = rng_.bernoulli(profile_.large_prob);
    for (auto& v : current_) {
      if (large) {
        const double mag = rng_.uniform(profile_.large_lo_deg, profile_.large_hi_deg);
        v = rng_.bernoulli(0.5) ? mag : -mag;
      } else {
        v = rng_.uniform(-profile_.small_abs_deg, profile_.small_abs_deg);
      }
    }
  }
}

AttitudeConfig attitude_real_twin(const AttitudeConfig& cfg, uint64_t seed) {
  AttitudeConfig twin = cfg;
  Rng rng(seed);
  for (auto& i : twin.inertia) i *= cfg.gap.inertia_scale;
  twin.motor_tau = cfg.motor_tau * cfg.gap.motor_tau_scale;
  twin.sensor_noise_deg = cfg.gap.sensor_noise_deg;
  for (auto& b : twin.motor_bias)
    b = rng.uniform(-cfg.gap.motor_bias_max, cfg.gap.motor_bias_max);
  return twin;
}

AttitudeReward attitude_reward(const AttitudeConfig& cfg,
                               const std::array<double, 3>& setpoint_deg,
                               const std::array<double, 3>& measured_deg,
                               const std::array<double, 4>& duty_cmd,
                               const std::array<double, 4>& prev_duty_cmd) {
  AttitudeReward out;
  double err_l1 = 0.0;
  for (int i = 0; i < 3; ++i)
    err_l1 += std::fabs(setpoint_deg[i] - measured_deg[i]);
  out.r_track = std::exp(-err_l1 / cfg.track_scale_deg);

  double delta_l1 = 0.0, mean_duty = 0.0;
  for (int i = 0; i < 4; ++i) {
    delta_l1 += std::fabs(duty_cmd[i] - prev_duty_cmd[i]);
    mean_duty += duty_cmd[i];
  }
  mean_duty *= 0.25;
  out.r_smooth = std::exp(-delta_l1 / cfg.smooth_scale);
  out.r_act = std::clamp(mean_duty / cfg.act_floor, 0.0, 1.0);

  out.reward = std::cbrt(out.r_track * out.r_smooth * out.r_act);
  return out;
}

std::array<double, 3> Attitude::mix_torque(const AttitudeConfig& cfg,
                                           const std::array<double, 4>& duty) {
  std::array<double, 3> torque{};
  for (int axis = 0; axis < 3; ++axis) {
    double t = 0.0;
    for (int m = 0; m < 4; ++m)
      t += kMixer[axis][m] * (duty[m] - cfg.hover_duty);
    torque[axis] = cfg.max_torque[axis] * t;
  }
  return torque;
}

Attitude::Attitude(const AttitudeConfig& cfg)
    : cfg_(cfg), rng_(0), setpoints_(0, cfg.profile, cfg.control_rate_hz) {}

std::vector<double> Attitude::reset(uint64_t seed) {
  rng_ = Rng(seed);
  setpoints_ = SetpointGenerator(rng_.raw(), cfg_.profile, cfg_.control_rate_hz);
  for (auto& w : omega_) w = rng_.uniform(-20.0, 20.0) * kDeg2Rad;
  duty_state_.fill(cfg_.hover_duty);
  duty_cmd_.fill(cfg_.hover_duty);
  prev_duty_cmd_.fill(cfg_.hover_duty);
  prev_action_.fill(0.0);
  setpoint_deg_ = setpoints_.next();
  for (int i = 0; i < 3; ++i)
    measured_deg_[i] = omega_[i] * kRad2Deg +
                       rng_.gauss(0.0, cfg_.sensor_noise_deg);
  step_count_ = 0;
  first_step_ = true;
  last_reward_ = {};
  return observe();
}

StepResult Attitude::step(std::span<const double> action) {
  if (action.size() != 4)
    throw std::invalid_argument("attitude: action must have 4 entries");

  prev_duty_cmd_ = duty_cmd_;
  for (int m = 0; m < 4; ++m) {
    const double a = std::clamp(action[m], -1.0, 1.0);
    prev_action_[m] = a;
    duty_cmd_[m] = 0.5 * (a + 1.0);
  }
  if (first_step_) {  // no predecessor command; r_smooth starts at 1
    prev_duty_cmd_ = duty_cmd_;
    first_step_ = false;
  }

  const double dt = 1.0 / cfg_.control_rate_hz;
  const double lag = 1.0 - std::exp(-dt / cfg_.motor_tau);
  for (int m = 0; m < 4; ++m) {
    const double target = std::clamp(duty_cmd_[m] + cfg_.motor_bias[m], 0.0, 1.0);
    duty_state_[m] += (target - duty_state_[m]) * lag;
  }

  const auto torque = mix_torque(cfg_, duty_state_);
  // w_dot = I^-1 (tau - w x (I w)), diagonal inertia
  const auto& I = cfg_.inertia;
  const std::array<double, 3> iw{I[0] * omega_[0], I[1] * omega_[1],
                                 I[2] * omega_[2]};
  const std::array<double, 3> gyro{
      omega_[1] * iw[2] - omega_[2] * iw[1],
      omega_[2] * iw[0] - omega_[0] * iw[2],
      omega_[0] * iw[1] - omega_[1] * iw[0],
  };
  const double max_rate = cfg_.max_rate_deg * kDeg2Rad;
  for (int axis = 0; axis < 3; ++axis) {
    omega_[axis] += dt * (torque[axis] - gyro[axis]) / I[axis];
    omega_[axis] = std::clamp(omega_[axis], -max_rate, max_rate);
    if (!std::isfinite(omega_[axis]))
      throw std::runtime_error("attitude: non-finite body rate");
  }

  step_count_ += 1;
  setpoint_deg_ = setpoints_.next();
  for (int i = 0; i < 3; ++i)
    measured_deg_[i] = omega_[i] * kRad2Deg +
                       rng_.gauss(0.0, cfg_.sensor_noise_deg);

  last_reward_ =
      attitude_reward(cfg_, setpoint_deg_, measured_deg_, duty_cmd_, prev_duty_cmd_);

  StepResult r;
  r.reward = last_reward_.reward;
  r.done = step_count_ >= cfg_.episode_len;
  r.obs = observe();
  return r;
}

std::vector<double> Attitude::observe() const {
  std::vector<double> obs(13);
  const double s = cfg_.obs_scale_deg;
  for (int i = 0; i < 3; ++i)
    obs[i] = (setpoint_deg_[i] - measured_deg_[i]) / s;
  for (int i = 0; i < 3; ++i) obs[3 + i] = measured_deg_[i] / s;
  for (int i = 0; i < 4; ++i) obs[6 + i] = prev_action_[i];
  for (int i = 0; i < 3; ++i) obs[10 + i] = setpoint_deg_[i] / s;
  return obs;
}

}  // namespace swann::env
