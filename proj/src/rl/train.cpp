#include "swann/rl/train.hpp"

#include <algorithm>
#include <cmath>

#include "swann/env/attitude.hpp"
#include "swann/env/pendulum.hpp"
#include "swann/util/csv.hpp"
#include "swann/util/fast_math.hpp"

namespace swann::rl {

namespace {

std::vector<double> explore_action(const AgentBundle& b,
                                   std::span<const double> obs, double noise,
                                   Rng& rng) {
  auto head = nn::forward(b.policy, obs);
  std::vector<double> a(b.act_dim);
  if (b.algo == Algo::Sac) {
    for (int i = 0; i < b.act_dim; ++i) {
      const double ls = std::clamp(head[b.act_dim + i], -20.0, 2.0);
      a[i] = fast_tanh(head[i] + fast_exp(ls) * rng.gauss());
    }
  } else {
    for (int i = 0; i < b.act_dim; ++i)
      a[i] = std::clamp(head[i] + noise * rng.gauss(), -1.0, 1.0);
  }
  return a;
}

void fill_pert_states(const AgentBundle& b, Batch& batch, Rng& rng) {
  batch.s_pert.resize(batch.s.size());
  const int d = batch.obs_dim;
  for (int e = 0; e < batch.size; ++e)
    for (int i = 0; i < d; ++i) {
      const double sigma = b.w.sigma_scale * b.obs_std.std(i);
      batch.s_pert[static_cast<size_t>(e) * d + i] =
          batch.s[static_cast<size_t>(e) * d + i] + sigma * rng.gauss();
    }
}

void fill_gauss(std::vector<double>& v, size_t n, Rng& rng) {
  v.resize(n);
  for (auto& x : v) x = rng.gauss();
}

struct UpdateStats {
  double critic_mse = 0.0;
  ActorEval actor;
  bool actor_stepped = false;
};

}  // namespace

EvalOutcome eval_policy(env::Env& e, const AgentBundle& b, int episodes,
                        uint64_t seed, bool collect_traces) {
  EvalOutcome out;
  auto* att = dynamic_cast<env::Attitude*>(&e);
  auto* pend = dynamic_cast<env::Pendulum*>(&e);
  double reward_acc = 0.0;
  int64_t step_count = 0;
  double mae_acc = 0.0;
  std::vector<double> torque_trace;
  for (int ep = 0; ep < episodes; ++ep) {
    auto obs = e.reset(seed * 1000003ULL + static_cast<uint64_t>(ep));
    metrics::EvalTrace trace;
    if (att) trace.fs = att->config().control_rate_hz;
    torque_trace.clear();
    bool done = false;
    while (!done) {
      const auto a = b.act(obs);
      const auto r = e.step(a);
      reward_acc += r.reward;
      step_count += 1;
      if (att) {
        trace.setpoint.push_back(att->setpoint_deg());
        trace.measured.push_back(att->measured_deg());
        trace.duty.push_back(att->duty_cmd());
      } else if (pend) {
        const double err =
            env::wrap_angle(pend->theta() - pend->config().target_angle);
        mae_acc += std::fabs(err) * 57.29577951308232;
        torque_trace.push_back(a[0]);
      }
      obs = r.obs;
      done = r.done;
    }
    if (att) {
      mae_acc += metrics::mae(trace);
      out.sm += metrics::smoothness(trace);
      if (collect_traces) out.traces.push_back(std::move(trace));
    } else if (pend && torque_trace.size() >= 8) {
      out.sm += metrics::smoothness(torque_trace, 1.0 / pend->config().dt);
    }
  }
  out.mean_reward = reward_acc / static_cast<double>(step_count);
  out.mae_deg = att ? mae_acc / episodes
                    : mae_acc / static_cast<double>(step_count);
  out.sm /= episodes;
  return out;
}

TrainResult train(Algo algo, bool anchored, const EnvFactory& make_env,
                  const TrainConfig& cfg, uint64_t seed,
                  const AgentBundle* warm_start,
                  std::shared_ptr<const ReplayBuffer> sim_buffer) {
  if (anchored && !sim_buffer)
    throw std::invalid_argument("anchored training requires a sim buffer");
  if (anchored && sim_buffer->size() == 0)
    throw std::runtime_error("anchored training: sim buffer is empty");

  auto training_env = make_env();
  auto eval_env = make_env();
  env::Env& e = *training_env;

  Rng rng(seed);
  Rng rng_env = rng.fork(1);
  Rng rng_act = rng.fork(2);
  Rng rng_batch = rng.fork(3);
  Rng rng_obj = rng.fork(4);

  TrainResult res;
  if (warm_start) {
    res.agent = anchored ? AgentBundle::make_anchored(*warm_start,
                                                      cfg.lr_actor,
                                                      cfg.lr_critic)
                         : *warm_start;
    res.agent.algo = algo;
    res.agent.w = cfg.w;
    res.agent.sac_alpha = cfg.sac_alpha;
  } else {
    if (anchored)
      throw std::invalid_argument("anchored training requires a warm start");
    res.agent = AgentBundle::make(algo, e.obs_size(), e.act_size(), cfg.hidden,
                                  cfg.w, cfg.lr_actor, cfg.lr_critic, rng);
    res.agent.sac_alpha = cfg.sac_alpha;
  }
  AgentBundle& b = res.agent;
  if (algo == Algo::Ddpg) {  // vanilla actor loss: CAPS terms zeroed
    b.w.lambda_t = 0.0;
    b.w.lambda_s = 0.0;
  }

  const auto role = anchored ? BufferRole::Live : BufferRole::Sim;
  res.buffer = std::make_shared<ReplayBuffer>(role, cfg.buffer_capacity,
                                              e.obs_size(), e.act_size());
  ReplayBuffer& buf = *res.buffer;

  Workspace ws;
  Batch batch, sim_batch;
  AnchorStates anchor_states;
  std::vector<double> y(cfg.batch_size);
  const double reward_scale = 1.0 - cfg.w.gamma;

  std::unique_ptr<CsvWriter> csv;
  if (!cfg.metrics_csv.empty())
    csv = std::make_unique<CsvWriter>(
        cfg.metrics_csv,
        std::vector<std::string>{"step", "eval_reward", "mean_j", "mean_q",
                                 "mean_q_anchor", "mean_lt", "mean_ls",
                                 "mean_pre", "critic_mse", "mae_deg", "sm"},
        cfg.config_hash);

  auto obs = e.reset(rng_env.raw());
  int64_t update_count = 0;
  UpdateStats last;

  auto run_update = [&]() {
    buf.sample(rng_batch, cfg.batch_size, reward_scale, batch);

    // critic step
    switch (algo) {
      case Algo::Sac:
        fill_gauss(batch.xi_next,
                   static_cast<size_t>(batch.size) * batch.act_dim, rng_obj);
        critic_targets_sac(cfg.exec, b.policy, b.q1_target, *b.q2_target,
                           cfg.w.gamma, b.sac_alpha, batch, ws, y);
        break;
      case Algo::Td3: {
        batch.smooth_eps.resize(static_cast<size_t>(batch.size) *
                                batch.act_dim);
        for (auto& v : batch.smooth_eps)
          v = std::clamp(cfg.td3_smooth_std * rng_obj.gauss(),
                         -cfg.td3_smooth_clip, cfg.td3_smooth_clip);
        critic_targets_td3(cfg.exec, b.policy_target, b.q1_target,
                           *b.q2_target, cfg.w.gamma, batch, ws, y);
        break;
      }
      default:
        critic_targets(cfg.exec, b.policy_target, b.q1_target, nullptr,
                       cfg.w.gamma, batch, ws, y);
    }
    last.critic_mse = critic_regress(cfg.exec, b.q1, *b.opt_q1, batch, y, ws);
    if (b.q2) critic_regress(cfg.exec, *b.q2, *b.opt_q2, batch, y, ws);

    // anchor critic keeps tracking the adapting policy on sim data
    if (anchored) {
      sim_buffer->sample(rng_batch, cfg.batch_size, reward_scale, sim_batch);
      update_anchor_critic(cfg.exec, b, sim_batch, ws);
    }

    update_count += 1;
    const bool actor_now =
        algo != Algo::Td3 || (update_count % cfg.td3_policy_delay == 0);
    if (actor_now) {
      fill_pert_states(b, batch, rng_obj);
      if (anchored) {
        anchor_states.size = sim_batch.size;
        anchor_states.obs_dim = sim_batch.obs_dim;
        anchor_states.s = sim_batch.s;
      }
      switch (algo) {
        case Algo::Sac:
          fill_gauss(batch.xi, static_cast<size_t>(batch.size) * batch.act_dim,
                     rng_obj);
          last.actor = sac_objective(cfg.exec, b, batch,
                                     anchored ? &anchor_states : nullptr, ws);
          break;
        case Algo::DdpgLinearCaps:
          last.actor = anchored
                           ? anchored_objective(cfg.exec, b, batch,
                                                anchor_states, ws)
                           : caps_linear_objective(cfg.exec, b, batch, ws);
          break;
        case Algo::Ddpg:
          last.actor = anchored ? anchored_objective(cfg.exec, b, batch,
                                                     anchor_states, ws)
                                : caps_linear_objective(cfg.exec, b, batch, ws);
          break;
        default:  // Ddpgx, Td3
          last.actor = anchored ? anchored_objective(cfg.exec, b, batch,
                                                     anchor_states, ws)
                                : multiplicative_objective(cfg.exec, b, batch, ws);
      }
      if (!std::isfinite(last.actor.loss))
        throw std::runtime_error("train: non-finite actor loss at update " +
                                 std::to_string(update_count));
      nn::adam_step(*b.opt_policy, b.policy.params, last.actor.dpolicy);
      last.actor_stepped = true;

      polyak_update(b.policy_target, b.policy, cfg.polyak);
      polyak_update(b.q1_target, b.q1, cfg.polyak);
      if (b.q2) polyak_update(*b.q2_target, *b.q2, cfg.polyak);
      if (b.q_anchor) polyak_update(*b.q_anchor_target, *b.q_anchor, cfg.polyak);
    }
  };

  auto emit_point = [&](int step) {
    const auto ev =
        eval_policy(*eval_env, b, cfg.eval_episodes, seed ^ 0xE7A1ULL);
    CurvePoint p;
    p.step = step;
    p.eval_reward = ev.mean_reward;
    p.mean_j = last.actor.mean_j;
    p.mean_q = last.actor.mean_q;
    p.mean_q_anchor = last.actor.mean_q_anchor;
    p.mean_lt = last.actor.mean_lt;
    p.mean_ls = last.actor.mean_ls;
    p.mean_pre = last.actor.mean_pre;
    p.critic_mse = last.critic_mse;
    p.mae_deg = ev.mae_deg;
    p.sm = ev.sm;
    res.curve.push_back(p);
    res.final_eval = ev.mean_reward;
    if (csv) {
      const double row[] = {static_cast<double>(p.step), p.eval_reward,
                            p.mean_j, p.mean_q, p.mean_q_anchor, p.mean_lt,
                            p.mean_ls, p.mean_pre, p.critic_mse, p.mae_deg,
                            p.sm};
      csv->row(row);
      csv->flush();
    }
  };

  for (int t = 0; t < cfg.steps; ++t) {
    std::vector<double> a;
    if (t < cfg.start_steps) {
      a.resize(e.act_size());
      for (auto& v : a) v = rng_act.uniform(-1.0, 1.0);
    } else {
      a = explore_action(b, obs, cfg.act_noise, rng_act);
    }
    const auto r = e.step(a);
    buf.push(obs, a, r.reward, r.obs, r.done);
    b.obs_std.update(obs);
    obs = r.done ? e.reset(rng_env.raw()) : r.obs;

    if (t + 1 > cfg.update_after && (t + 1) % cfg.update_every == 0)
      for (int k = 0; k < cfg.update_every; ++k) run_update();

    if (cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0) emit_point(t + 1);
  }
  if (res.curve.empty() || res.curve.back().step != cfg.steps)
    emit_point(cfg.steps);
  return res;
}

}  // namespace swann::rl
