#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "msr/types.hpp"

namespace msr {

/// One (s, a, r, s') experience record.
struct Transition {
  VecX observation;
  VecX action;
  double reward = 0.0;
  VecX next_observation;
};

/// Columns of a sampled minibatch, one sample per column.
struct TransitionBatch {
  MatX observations;
  MatX actions;
  VecX rewards;
  MatX next_observations;

  int size() const { return static_cast<int>(rewards.size()); }
};

/// Bounded circular store with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Always allowed; evicts the oldest record at capacity.
  void push(Transition transition);

  /// Requires size() >= n.
  TransitionBatch sample(int n, std::mt19937_64& rng) const;

  std::size_t size() const { return store_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> store_;
};

}  // namespace msr
