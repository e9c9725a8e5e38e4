#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swann/util/rng.hpp"

namespace swann::rl {

enum class BufferRole : uint8_t { Sim = 0, Live = 1 };

// One sampled minibatch. Rewards are pre-scaled by (1-gamma) at sampling
// time so Bellman targets stay in [0,1]; `role` tags provenance so sim and
// live data can never be mixed in one batch.
struct Batch {
  BufferRole role = BufferRole::Sim;
  int size = 0;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> s;     // size x obs_dim
  std::vector<double> a;     // size x act_dim
  std::vector<double> r;     // scaled rewards
  std::vector<double> s2;    // size x obs_dim
  std::vector<double> done;  // 0/1
  // filled by the actor step when needed
  std::vector<double> s_pert;      // spatially perturbed states
  std::vector<double> xi;          // SAC reparameterization noise
  std::vector<double> xi_next;     // SAC next-action noise (critic targets)
  std::vector<double> smooth_eps;  // TD3 target smoothing noise (clipped)

  std::span<const double> state(int e) const {
    return {s.data() + static_cast<size_t>(e) * obs_dim, (size_t)obs_dim};
  }
  std::span<const double> action(int e) const {
    return {a.data() + static_cast<size_t>(e) * act_dim, (size_t)act_dim};
  }
  std::span<const double> next_state(int e) const {
    return {s2.data() + static_cast<size_t>(e) * obs_dim, (size_t)obs_dim};
  }
  std::span<const double> pert_state(int e) const {
    return {s_pert.data() + static_cast<size_t>(e) * obs_dim, (size_t)obs_dim};
  }
};

// Ring buffer of (s, a, r, s', done) records in float32, stored flat.
// Capacity is reserved lazily so oversized configured capacities cost
// nothing until filled.
class ReplayBuffer {
public:
  ReplayBuffer(BufferRole role, size_t capacity, int obs_dim, int act_dim)
      : role_(role), capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {}

  void push(std::span<const double> s, std::span<const double> a, double r,
            std::span<const double> s2, bool done, uint16_t policy_version = 0);

  // n transitions with replacement; rewards scaled by reward_scale
  void sample(Rng& rng, int n, double reward_scale, Batch& out) const;

  size_t size() const { return count_ < capacity_ ? count_ : capacity_; }
  size_t pushed() const { return count_; }
  BufferRole role() const { return role_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  void save(const std::string& path) const;
  static ReplayBuffer load(const std::string& path);

private:
  BufferRole role_;
  size_t capacity_;
  int obs_dim_;
  int act_dim_;
  size_t count_ = 0;  // total pushed
  std::vector<float> s_, a_, s2_;
  std::vector<float> r_;
  std::vector<uint8_t> done_;
  std::vector<uint16_t> version_;
};

}  // namespace swann::rl
