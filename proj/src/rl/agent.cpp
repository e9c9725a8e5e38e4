#include "swann/rl/agent.hpp"

#include <stdexcept>

#include "swann/util/fast_math.hpp"

namespace swann::rl {

Algo algo_from_name(const std::string& name) {
  if (name == "ddpg") return Algo::Ddpg;
  if (name == "ddpg_linear_caps") return Algo::DdpgLinearCaps;
  if (name == "ddpgx") return Algo::Ddpgx;
  if (name == "sac") return Algo::Sac;
  if (name == "td3") return Algo::Td3;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::Ddpg: return "ddpg";
    case Algo::DdpgLinearCaps: return "ddpg_linear_caps";
    case Algo::Ddpgx: return "ddpgx";
    case Algo::Sac: return "sac";
    case Algo::Td3: return "td3";
  }
  return "?";
}

std::vector<double> AgentBundle::act(std::span<const double> obs) const {
  auto out = nn::forward(policy, obs);
  if (algo == Algo::Sac) {
    std::vector<double> a(act_dim);
    for (int i = 0; i < act_dim; ++i) a[i] = fast_tanh(out[i]);  // mean head
    return a;
  }
  return out;
}

AgentBundle AgentBundle::make(Algo algo, int obs_dim, int act_dim,
                              const std::vector<uint16_t>& hidden,
                              const ObjectiveWeights& w, double lr_actor,
                              double lr_critic, Rng& rng) {
  AgentBundle b;
  b.algo = algo;
  b.obs_dim = obs_dim;
  b.act_dim = act_dim;
  b.w = w;
  b.obs_std = RunningStd(obs_dim);

  std::vector<uint16_t> pol_sizes{static_cast<uint16_t>(obs_dim)};
  pol_sizes.insert(pol_sizes.end(), hidden.begin(), hidden.end());
  const int pol_out = (algo == Algo::Sac) ? 2 * act_dim : act_dim;
  pol_sizes.push_back(static_cast<uint16_t>(pol_out));
  const auto pol_act =
      (algo == Algo::Sac) ? nn::Activation::Identity : nn::Activation::Tanh;
  b.policy = nn::Mlp::make(pol_sizes, pol_act, rng, 1e-2);
  b.policy_target = b.policy;

  std::vector<uint16_t> q_sizes{static_cast<uint16_t>(obs_dim + act_dim)};
  q_sizes.insert(q_sizes.end(), hidden.begin(), hidden.end());
  q_sizes.push_back(1);
  b.q1 = nn::Mlp::make(q_sizes, nn::Activation::Identity, rng);
  b.q1_target = b.q1;
  if (algo == Algo::Sac || algo == Algo::Td3) {
    b.q2 = nn::Mlp::make(q_sizes, nn::Activation::Identity, rng);
    b.q2_target = b.q2;
    b.opt_q2.emplace(b.q2->param_count(), lr_critic);
  }
  b.opt_policy.emplace(b.policy.param_count(), lr_actor);
  b.opt_q1.emplace(b.q1.param_count(), lr_critic);
  return b;
}

AgentBundle AgentBundle::make_anchored(const AgentBundle& sim_trained,
                                       double lr_actor, double lr_critic) {
  AgentBundle b = sim_trained;
  b.q_anchor = sim_trained.q1;
  b.q_anchor_target = sim_trained.q1_target;
  b.opt_policy.emplace(b.policy.param_count(), lr_actor);
  b.opt_q1.emplace(b.q1.param_count(), lr_critic);
  if (b.q2) b.opt_q2.emplace(b.q2->param_count(), lr_critic);
  b.opt_anchor.emplace(b.q_anchor->param_count(), lr_critic);
  return b;
}

}  // namespace swann::rl
