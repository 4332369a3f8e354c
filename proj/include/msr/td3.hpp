#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "msr/mlp.hpp"
#include "msr/replay_buffer.hpp"
#include "msr/types.hpp"

namespace msr {

struct Hyperparams {
  double discount = 0.99;        // gamma
  double learning_rate = 3e-4;   // alpha
  int batch_size = 256;
  double polyak = 0.005;         // tau_p
  int policy_delay = 2;          // d
  double target_noise = 0.2;     // sigma_t, fraction of the action scale
  double noise_clip = 0.5;       // c_t, fraction of the action scale
  double exploration_noise = 0.1;  // sigma_e, fraction of the action scale
  long warmup_steps = 1000;
  std::size_t buffer_capacity = 1'000'000;
  std::vector<int> hidden_sizes{256, 256};
};

/// Actor, twin critics, and their Polyak-tracked target copies.
struct AgentNets {
  Mlp actor, critic1, critic2;
  Mlp target_actor, target_critic1, target_critic2;
};

/// From-scratch TD3: clipped-noise target smoothing, twin critics with a
/// shared min target, delayed actor and target updates.
class Td3Agent {
 public:
  Td3Agent(int obs_dim, int act_dim, double action_bound,
           const Hyperparams& hp, std::uint64_t seed);

  /// tanh-bounded deterministic action plus Gaussian exploration noise with
  /// the given std (absolute units), clipped back to the bounds.
  VecX select_action(const VecX& observation, double noise_std);

  /// Uniform random action within bounds (warmup exploration).
  VecX random_action();

  void observe(Transition transition) { buffer_.push(std::move(transition)); }

  /// One TD3 training iteration: critic regression on the shared smoothed
  /// min target, plus a delayed actor and target update. No-op until the
  /// buffer holds a full batch. Returns (critic1 loss, critic2 loss).
  std::pair<double, double> train_step();

  /// y = r + gamma * min(Q1'(s', a'), Q2'(s', a')) with a' = pi'(s') plus
  /// clipped Gaussian smoothing noise, re-clipped to the action bounds.
  VecX td_target(const TransitionBatch& batch);

  /// One optimizer step on each critic toward the shared target; returns the
  /// mean-squared losses before the step.
  std::pair<double, double> critic_update(const TransitionBatch& batch,
                                          const VecX& target);

  /// Gradient step maximizing mean Q1(s, pi(s)); critics untouched.
  double actor_update(const TransitionBatch& batch);

  void update_targets();

  const AgentNets& nets() const { return nets_; }
  AgentNets& nets() { return nets_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Hyperparams& hyperparams() const { return hp_; }
  double action_bound() const { return action_bound_; }
  long trained_steps() const { return trained_steps_; }
  std::mt19937_64& rng() { return rng_; }

  void save(std::ostream& out, std::uint64_t config_hash) const;
  /// Validates shapes and the stored config hash (pass 0 to skip the check).
  void load(std::istream& in, std::uint64_t expected_config_hash);

 private:
  Hyperparams hp_;
  int obs_dim_;
  int act_dim_;
  double action_bound_;
  AgentNets nets_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
  ReplayBuffer buffer_;
  long trained_steps_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace msr
