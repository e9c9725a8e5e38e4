#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "swann/nn/mlp.hpp"
#include "swann/util/rng.hpp"

namespace swann::rl {

enum class Algo { Ddpg, DdpgLinearCaps, Ddpgx, Sac, Td3 };

Algo algo_from_name(const std::string& name);
std::string algo_name(Algo a);

// Every symbol of the composed objectives in one place.
struct ObjectiveWeights {
  double gamma = 0.99;
  // linear CAPS
  double lambda_t = 0.05;
  double lambda_s = 0.05;
  // multiplicative soft thresholds
  double w_t = 0.1;
  double w_s = 0.1;
  double w_a = 1.0;
  // anchor exponent
  double w_psi = 1.0;
  // spatial perturbation std = sigma_scale * per-dim observation std
  double sigma_scale = 0.05;
  // Q factors clamped to [q_eps, 1] before the geometric mean
  double q_eps = 1e-6;
};

// Per-dimension running mean/std (Welford), drives the spatial
// perturbation scale.
class RunningStd {
public:
  explicit RunningStd(int dim) : n_(0), mean_(dim, 0.0), m2_(dim, 0.0) {}
  void update(std::span<const double> x) {
    n_ += 1;
    for (size_t i = 0; i < mean_.size(); ++i) {
      const double d = x[i] - mean_[i];
      mean_[i] += d / static_cast<double>(n_);
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }
  double std(size_t i) const {
    return n_ > 1 ? std::sqrt(m2_[i] / static_cast<double>(n_ - 1)) : 0.0;
  }
  int64_t count() const { return n_; }

private:
  int64_t n_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

// Policy, critics, targets and optimizer state for one agent. The anchor
// critic is present only in anchored mode; twin critics only for SAC/TD3.
struct AgentBundle {
  Algo algo = Algo::Ddpg;
  int obs_dim = 0;
  int act_dim = 0;
  ObjectiveWeights w;

  nn::Mlp policy, policy_target;
  nn::Mlp q1, q1_target;
  std::optional<nn::Mlp> q2, q2_target;
  std::optional<nn::Mlp> q_anchor, q_anchor_target;

  std::optional<nn::AdamState> opt_policy, opt_q1, opt_q2, opt_anchor;
  // SAC entropy coefficient (fixed, no auto-tuning)
  double sac_alpha = 0.05;

  RunningStd obs_std{1};

  bool anchored() const { return q_anchor.has_value(); }
  // deterministic action (SAC uses the squashed mean)
  std::vector<double> act(std::span<const double> obs) const;

  static AgentBundle make(Algo algo, int obs_dim, int act_dim,
                          const std::vector<uint16_t>& hidden,
                          const ObjectiveWeights& w, double lr_actor,
                          double lr_critic, Rng& rng);

  // Adaptation-time bundle: policy carried over, live critic warm-started
  // from the sim critic, anchor critic = sim critic (target carried),
  // fresh optimizer moments.
  static AgentBundle make_anchored(const AgentBundle& sim_trained,
                                   double lr_actor, double lr_critic);
};

}  // namespace swann::rl
