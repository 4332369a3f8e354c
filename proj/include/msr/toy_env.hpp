#pragma once

#include <algorithm>
#include <random>

#include "msr/env.hpp"

namespace msr {

/// 1D bounded-increment point mass on [-1, 1]: action dx is clipped to
/// +-max_increment, reward is the realized displacement, episodes truncate
/// after episode_steps. Starting from 0, the optimal return is exactly 1
/// (always push toward the right wall), reached within 1/max_increment steps.
class ToyPointMassEnv : public Environment {
 public:
  struct Config {
    double max_increment = 0.05;
    long episode_steps = 200;
    bool random_start = false;  // uniform in [-0.5, 0.5] when set
  };

  ToyPointMassEnv() = default;
  explicit ToyPointMassEnv(const Config& cfg) : cfg_(cfg) {}

  VecX reset(std::uint64_t seed) override {
    rng_.seed(seed);
    position_ = 0.0;
    if (cfg_.random_start) {
      std::uniform_real_distribution<double> start(-0.5, 0.5);
      position_ = start(rng_);
    }
    start_ = position_;
    step_index_ = 0;
    return observation();
  }

  StepResult step(const VecX& action) override {
    const double dx = std::clamp(action(0), -cfg_.max_increment, cfg_.max_increment);
    const double next = std::clamp(position_ + dx, -1.0, 1.0);
    StepResult result;
    result.reward = next - position_;
    position_ = next;
    ++step_index_;
    result.truncated = step_index_ >= cfg_.episode_steps;
    result.observation = observation();
    return result;
  }

  int observation_size() const override { return 1; }
  int action_size() const override { return 1; }
  double action_bound() const override { return cfg_.max_increment; }
  double forward_displacement() const override { return position_ - start_; }

  double optimal_return() const { return 1.0 - start_; }

 private:
  VecX observation() const {
    VecX obs(1);
    obs(0) = position_;
    return obs;
  }

  Config cfg_;
  double position_ = 0.0;
  double start_ = 0.0;
  long step_index_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace msr
