#pragma once

#include <array>
#include <cstdint>

#include "swann/env/env.hpp"
#include "swann/env/setpoint.hpp"
#include "swann/util/rng.hpp"

namespace swann::env {

// Multiplicative perturbations applied when building the "real" twin.
struct DomainGap {
  double inertia_scale = 1.2;
  double motor_tau_scale = 2.0;
  double sensor_noise_deg = 0.5;  // additive gyro noise std, deg/s
  double motor_bias_max = 0.05;   // per-motor duty bias, uniform +/-
};

struct AttitudeConfig {
  std::array<double, 3> inertia{0.003, 0.003, 0.005};  // kg*m^2, diagonal
  double motor_tau = 0.03;                             // s
  std::array<double, 3> max_torque{0.2, 0.2, 0.08};    // N*m per axis
  double control_rate_hz = 500.0;
  double hover_duty = 0.3;
  double max_rate_deg = 2000.0;  // state clamp, deg/s

  // reward shaping
  double track_scale_deg = 250.0;  // L1 error at which r_track = 1/e
  double smooth_scale = 0.1;       // L1 duty delta at which r_smooth = 1/e
  double act_floor = 0.15;         // mean duty below this scales r_act

  double obs_scale_deg = 400.0;  // rate entries divided by this in obs

  SetpointProfile profile{};
  int episode_len = 1000;

  // zero in the simulation twin; set by attitude_real_twin
  double sensor_noise_deg = 0.0;
  std::array<double, 4> motor_bias{0.0, 0.0, 0.0, 0.0};

  DomainGap gap{};
};

// Applies cfg.gap: inertia and motor lag scaled, gyro noise and per-motor
// duty bias (sampled from seed) switched on.
AttitudeConfig attitude_real_twin(const AttitudeConfig& cfg, uint64_t seed);

struct AttitudeReward {
  double r_track = 0.0;
  double r_smooth = 0.0;
  double r_act = 0.0;
  double reward = 0.0;  // geometric mean of the three
};

// Shared by the environment and by ground-side transition reconstruction:
// everything here is computable from transmitted observations.
AttitudeReward attitude_reward(const AttitudeConfig& cfg,
                               const std::array<double, 3>& setpoint_deg,
                               const std::array<double, 3>& measured_deg,
                               const std::array<double, 4>& duty_cmd,
                               const std::array<double, 4>& prev_duty_cmd);

// Body-rate tracking plant: 4 motor commands in [-1, 1] mapped to duty in
// [0, 1], first-order motor lag, rigid-body Euler rotation about diagonal
// inertia. Observation (13): rate error, measured rate, previous action,
// target, with rate entries scaled by 1/obs_scale_deg.
class Attitude final : public Env {
public:
  explicit Attitude(const AttitudeConfig& cfg);

  int obs_size() const override { return 13; }
  int act_size() const override { return 4; }
  std::vector<double> reset(uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

  const AttitudeConfig& config() const { return cfg_; }
  double dt() const { return 1.0 / cfg_.control_rate_hz; }

  // raw telemetry for traces and uplink packets (deg/s, duty units)
  const std::array<double, 3>& setpoint_deg() const { return setpoint_deg_; }
  const std::array<double, 3>& measured_deg() const { return measured_deg_; }
  const std::array<double, 4>& duty_cmd() const { return duty_cmd_; }
  const std::array<double, 4>& prev_action() const { return prev_action_; }
  const AttitudeReward& last_reward() const { return last_reward_; }

  // true rotation state, rad/s (oracle tests)
  const std::array<double, 3>& omega() const { return omega_; }
  const std::array<double, 4>& duty_state() const { return duty_state_; }

  static std::array<double, 3> mix_torque(const AttitudeConfig& cfg,
                                          const std::array<double, 4>& duty);

  std::vector<double> observe() const;

private:
  AttitudeConfig cfg_;
  Rng rng_;
  SetpointGenerator setpoints_;
  std::array<double, 3> omega_{};         // rad/s, truth
  std::array<double, 4> duty_state_{};    // lagged motor duty
  std::array<double, 4> duty_cmd_{};      // commanded duty (this tick)
  std::array<double, 4> prev_duty_cmd_{};
  std::array<double, 4> prev_action_{};
  std::array<double, 3> setpoint_deg_{};
  std::array<double, 3> measured_deg_{};
  AttitudeReward last_reward_{};
  int step_count_ = 0;
  bool first_step_ = true;
};

}  // namespace swann::env
