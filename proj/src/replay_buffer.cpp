#include "msr/replay_buffer.hpp"

namespace msr {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("ReplayBuffer: capacity must be > 0");
}

void ReplayBuffer::push(Transition transition) {
  if (store_.size() < capacity_) {
    store_.push_back(std::move(transition));
  } else {
    store_[next_] = std::move(transition);
  }
  next_ = (next_ + 1) % capacity_;
}

TransitionBatch ReplayBuffer::sample(int n, std::mt19937_64& rng) const {
  if (static_cast<std::size_t>(n) > store_.size()) {
    throw ConfigError("ReplayBuffer: sample of " + std::to_string(n) +
                      " requested with only " + std::to_string(store_.size()) +
                      " stored");
  }
  std::uniform_int_distribution<std::size_t> pick(0, store_.size() - 1);
  const int obs_dim = static_cast<int>(store_.front().observation.size());
  const int act_dim = static_cast<int>(store_.front().action.size());

  TransitionBatch batch;
  batch.observations.resize(obs_dim, n);
  batch.actions.resize(act_dim, n);
  batch.rewards.resize(n);
  batch.next_observations.resize(obs_dim, n);
  for (int i = 0; i < n; ++i) {
    const Transition& t = store_[pick(rng)];
    batch.observations.col(i) = t.observation;
    batch.actions.col(i) = t.action;
    batch.rewards(i) = t.reward;
    batch.next_observations.col(i) = t.next_observation;
  }
  return batch;
}

}  // namespace msr
