#pragma once

#include <functional>
#include <memory>
#include <string>

#include "swann/env/env.hpp"
#include "swann/metrics/metrics.hpp"
#include "swann/rl/objectives.hpp"

namespace swann::rl {

using EnvFactory = std::function<std::unique_ptr<env::Env>()>;

struct TrainConfig {
  int steps = 300000;
  int batch_size = 100;
  double polyak = 0.995;
  double lr_actor = 1e-4;
  double lr_critic = 1e-4;
  double act_noise = 0.05;
  int start_steps = 5000;   // uniform random warmup (0 for adaptation)
  int update_after = 1000;  // first gradient step
  int update_every = 1;     // env steps per update cycle (1:1 kept)
  size_t buffer_capacity = 1'000'000;
  std::vector<uint16_t> hidden{32, 32};
  double sac_alpha = 0.05;
  double td3_smooth_std = 0.1;
  double td3_smooth_clip = 0.3;
  int td3_policy_delay = 2;
  int eval_episodes = 5;
  int eval_every = 0;  // 0 = final eval only
  ObjectiveWeights w;
  nn::ExecMode exec = nn::ExecMode::OpenMP;
  std::string metrics_csv;  // per-window CSV, empty = none
  uint64_t config_hash = 0;
};

struct EvalOutcome {
  double mean_reward = 0.0;
  double mae_deg = 0.0;  // attitude/pendulum tracking error
  double sm = 0.0;       // actuation smoothness
  std::vector<metrics::EvalTrace> traces;
};

// Deterministic-policy evaluation on fresh episodes. Collects attitude
// traces (or pendulum torque traces) for the smoothness metrics.
EvalOutcome eval_policy(env::Env& e, const AgentBundle& b, int episodes,
                        uint64_t seed, bool collect_traces = false);

struct CurvePoint {
  int step = 0;
  double eval_reward = 0, mean_j = 0, mean_q = 0, mean_q_anchor = 0;
  double mean_lt = 0, mean_ls = 0, mean_pre = 0, critic_mse = 0;
  double mae_deg = 0, sm = 0;
};

struct TrainResult {
  AgentBundle agent;
  std::shared_ptr<ReplayBuffer> buffer;
  double final_eval = 0.0;
  std::vector<CurvePoint> curve;
};

// Off-policy training: act with exploration noise, store, sample, critic
// step, actor step with the algorithm's objective, polyak targets. In
// anchored mode the sim buffer feeds the anchor critic update and the
// anchor factor of the actor objective. `warm_start` carries a trained
// bundle into adaptation.
TrainResult train(Algo algo, bool anchored, const EnvFactory& make_env,
                  const TrainConfig& cfg, uint64_t seed,
                  const AgentBundle* warm_start = nullptr,
                  std::shared_ptr<const ReplayBuffer> sim_buffer = nullptr);

}  // namespace swann::rl
