#pragma once

#include <span>
#include <vector>

#include "swann/nn/batch.hpp"
#include "swann/rl/agent.hpp"
#include "swann/rl/replay.hpp"

namespace swann::rl {

// States drawn from the sim buffer on which the anchor critic judges the
// current policy.
struct AnchorStates {
  int size = 0;
  int obs_dim = 0;
  std::vector<double> s;
  std::span<const double> state(int e) const {
    return {s.data() + static_cast<size_t>(e) * obs_dim, (size_t)obs_dim};
  }
};

// Reusable per-batch scratch (per-element forward caches and gradient
// rows); allocate once per training loop.
struct Workspace {
  struct Elem {
    nn::FwdCache pol_s, pol_s2, pol_pert, pol_anchor;
    nn::FwdCache q_live, q_anchor, q_live2;
    std::vector<double> qin;
    std::vector<double> dqin;
    std::vector<double> dout, dpre, dout2, dout3, dout4;
    double j = 0, q = 0, qpsi = 0, lt = 0, ls = 0, pre = 0;
  };
  std::vector<Elem> elems;
  std::vector<double> grad_rows;  // batch x param_count; rows zeroed by kernels
  std::vector<double> grad;       // reduced
  std::vector<double> values;     // per-element scalar (targets, J, ...)

  void ensure(int batch, size_t params) {
    if (elems.size() < static_cast<size_t>(batch)) elems.resize(batch);
    grad_rows.resize(static_cast<size_t>(batch) * params);
    grad.resize(params);
    values.resize(batch);
  }
};

struct ActorEval {
  double loss = 0.0;             // scalar to minimize
  std::vector<double> dpolicy;   // d loss / d policy params
  // batch means for logs and range asserts
  double mean_j = 0.0;
  double mean_q = 0.0;
  double mean_q_anchor = 0.0;
  double mean_lt = 0.0;
  double mean_ls = 0.0;
  double mean_pre = 0.0;
  double min_j = 0.0;
  double max_j = 0.0;
};

// Bellman regression targets y = clamp(r + gamma (1-done) Q_t(s', a'), 0, 1)
// with a' from the target policy. Rewards must arrive pre-scaled by
// (1-gamma). q2_target, when given, contributes via min (TD3).
void critic_targets(nn::ExecMode mode, const nn::Mlp& policy_target,
                    const nn::Mlp& q_target, const nn::Mlp* q2_target,
                    double gamma, const Batch& batch, Workspace& ws,
                    std::span<double> y_out);

// TD3 variant: target action smoothed by batch.smooth_eps (pre-clipped).
void critic_targets_td3(nn::ExecMode mode, const nn::Mlp& policy_target,
                        const nn::Mlp& q1_target, const nn::Mlp& q2_target,
                        double gamma, const Batch& batch, Workspace& ws,
                        std::span<double> y_out);

// SAC variant: next action sampled from the online policy with batch.xi_next,
// entropy bonus -alpha log pi included before the clamp.
void critic_targets_sac(nn::ExecMode mode, const nn::Mlp& policy,
                        const nn::Mlp& q1_target, const nn::Mlp& q2_target,
                        double gamma, double alpha, const Batch& batch,
                        Workspace& ws, std::span<double> y_out);

// One Adam step of q on 0.5*mean (Q(s,a) - y)^2; returns the mse.
double critic_regress(nn::ExecMode mode, nn::Mlp& q, nn::AdamState& opt,
                      const Batch& batch, std::span<const double> y,
                      Workspace& ws);

// Eq.1-style linear composition: loss = -mean[Q - lambda_T L_T - lambda_S L_S].
ActorEval caps_linear_objective(nn::ExecMode mode, const AgentBundle& b,
                                const Batch& batch, Workspace& ws);

// Geometric mean of Q and the three normalized regularizers under a 4th
// root; loss = -mean J, computed in log space.
ActorEval multiplicative_objective(nn::ExecMode mode, const AgentBundle& b,
                                   const Batch& batch, Workspace& ws);

// Anchored extension: adds the anchor critic's judgment of the current
// policy on sim states as a fifth factor (exponent w_psi, 5th root).
ActorEval anchored_objective(nn::ExecMode mode, const AgentBundle& b,
                             const Batch& live_batch,
                             const AnchorStates& sim_states, Workspace& ws);

// SAC actor loss: mean(alpha log pi - Qmin) plain, or with the geometric
// composition (and anchor factor when sim_states given) replacing Qmin.
ActorEval sac_objective(nn::ExecMode mode, const AgentBundle& b,
                        const Batch& batch, const AnchorStates* sim_states,
                        Workspace& ws);

// One Bellman step of the anchor critic on sim transitions, bootstrapping
// with the current policy's target network.
double update_anchor_critic(nn::ExecMode mode, AgentBundle& b,
                            const Batch& sim_batch, Workspace& ws);

}  // namespace swann::rl
