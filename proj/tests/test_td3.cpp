#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "msr/td3.hpp"

using namespace msr;

namespace {

Hyperparams tiny_hp() {
  Hyperparams hp;
  hp.hidden_sizes = {8, 8};
  hp.batch_size = 8;
  return hp;
}

Transition random_transition(int obs_dim, int act_dim, double reward,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Transition t;
  t.observation = VecX(obs_dim);
  t.next_observation = VecX(obs_dim);
  t.action = VecX(act_dim);
  for (int i = 0; i < obs_dim; ++i) {
    t.observation(i) = noise(rng);
    t.next_observation(i) = noise(rng);
  }
  for (int i = 0; i < act_dim; ++i) t.action(i) = noise(rng);
  t.reward = reward;
  return t;
}

TransitionBatch random_batch(int obs_dim, int act_dim, int n,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  TransitionBatch batch;
  batch.observations.resize(obs_dim, n);
  batch.actions.resize(act_dim, n);
  batch.rewards.resize(n);
  batch.next_observations.resize(obs_dim, n);
  for (int i = 0; i < batch.observations.size(); ++i) {
    batch.observations.data()[i] = noise(rng);
    batch.next_observations.data()[i] = noise(rng);
  }
  for (int i = 0; i < batch.actions.size(); ++i)
    batch.actions.data()[i] = noise(rng);
  for (int i = 0; i < n; ++i) batch.rewards(i) = noise(rng);
  return batch;
}

/// Critic Q(s, a) = -|a - a_star| built from two rectified half-planes.
void install_absolute_value_critic(Mlp& critic, double a_star) {
  REQUIRE(critic.layer_count() == 2);
  REQUIRE(critic.weights()[0].cols() == 2);   // (obs, action) input
  REQUIRE(critic.weights()[0].rows() == 2);   // two hidden units
  critic.weights()[0] << 0.0, 1.0, 0.0, -1.0;
  critic.biases()[0] << -a_star, a_star;
  critic.weights()[1] << -1.0, -1.0;
  critic.biases()[1] << 0.0;
}

}  // namespace

TEST_CASE("actions always respect the bound") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 1.0);
  Td3Agent agent(5, 2, 0.3, tiny_hp(), 11);

  for (int trial = 0; trial < 200; ++trial) {
    VecX obs(5);
    for (int i = 0; i < 5; ++i) obs(i) = 10.0 * noise(rng);
    const VecX a = agent.select_action(obs, 5.0);  // huge exploration noise
    CHECK(a.cwiseAbs().maxCoeff() <= 0.3);
    const VecX r = agent.random_action();
    CHECK(r.cwiseAbs().maxCoeff() <= 0.3);
  }

  // Saturated actor output pins the deterministic action to the bound.
  for (auto& w : agent.nets().actor.weights()) w.setZero();
  for (auto& b : agent.nets().actor.biases()) b.setZero();
  agent.nets().actor.biases().back()(0) = 100.0;
  agent.nets().actor.biases().back()(1) = -100.0;
  const VecX a = agent.select_action(VecX::Zero(5), 0.0);
  CHECK(a(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(a(1) == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("zero exploration noise is deterministic") {
  Td3Agent agent(4, 2, 0.3, tiny_hp(), 7);
  VecX obs(4);
  obs << 0.2, -1.0, 0.4, 3.0;
  const VecX a1 = agent.select_action(obs, 0.0);
  const VecX a2 = agent.select_action(obs, 0.0);
  CHECK((a1 - a2).cwiseAbs().maxCoeff() == 0.0);
  const VecX a3 = agent.select_action(obs, 0.1);
  CHECK((a1 - a3).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("td target with zero discount equals the rewards") {
  Hyperparams hp = tiny_hp();
  hp.discount = 0.0;
  Td3Agent agent(3, 2, 0.3, hp, 3);
  std::mt19937_64 rng(5);
  const TransitionBatch batch = random_batch(3, 2, 6, rng);
  const VecX y = agent.td_target(batch);
  CHECK((y - batch.rewards).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("td target takes the minimum of constant twin critics") {
  Hyperparams hp = tiny_hp();
  hp.target_noise = 0.0;
  Td3Agent agent(3, 2, 0.3, hp, 3);
  // Constant target critics: Q1' = 1.0, Q2' = 0.8 everywhere.
  for (Mlp* net : {&agent.nets().target_critic1, &agent.nets().target_critic2}) {
    for (auto& w : net->weights()) w.setZero();
    for (auto& b : net->biases()) b.setZero();
  }
  agent.nets().target_critic1.biases().back()(0) = 1.0;
  agent.nets().target_critic2.biases().back()(0) = 0.8;

  std::mt19937_64 rng(9);
  TransitionBatch batch = random_batch(3, 2, 5, rng);
  batch.rewards.setZero();
  const VecX y = agent.td_target(batch);
  for (int i = 0; i < y.size(); ++i) {
    CHECK(y(i) == doctest::Approx(0.99 * 0.8).epsilon(1e-12));
  }
}

TEST_CASE("td target never exceeds either single-critic target") {
  Hyperparams hp = tiny_hp();
  hp.target_noise = 0.0;  // deterministic a' so the oracle sees the same input
  Td3Agent agent(4, 2, 0.3, hp, 21);
  std::mt19937_64 rng(13);
  const TransitionBatch batch = random_batch(4, 2, 16, rng);
  const VecX y = agent.td_target(batch);

  MatX next_actions =
      0.3 * agent.nets().target_actor.forward(batch.next_observations);
  MatX joined(4 + 2, batch.size());
  joined.topRows(4) = batch.next_observations;
  joined.bottomRows(2) = next_actions;
  const MatX q1 = agent.nets().target_critic1.forward(joined);
  const MatX q2 = agent.nets().target_critic2.forward(joined);
  for (int i = 0; i < batch.size(); ++i) {
    const double y1 = batch.rewards(i) + hp.discount * q1(0, i);
    const double y2 = batch.rewards(i) + hp.discount * q2(0, i);
    CHECK(y(i) <= y1 + 1e-12);
    CHECK(y(i) <= y2 + 1e-12);
    CHECK(y(i) == doctest::Approx(std::min(y1, y2)).epsilon(1e-12));
  }
}

TEST_CASE("critic loss is zero at its own predictions") {
  Td3Agent agent(3, 1, 0.3, tiny_hp(), 2);
  std::mt19937_64 rng(17);
  const TransitionBatch batch = random_batch(3, 1, 8, rng);
  MatX joined(4, batch.size());
  joined.topRows(3) = batch.observations;
  joined.bottomRows(1) = batch.actions;
  const VecX target = agent.nets().critic1.forward(joined).row(0).transpose();
  const auto [loss1, loss2] = agent.critic_update(batch, target);
  CHECK(loss1 == 0.0);
  CHECK(loss2 > 0.0);  // independently initialized twin disagrees
}

TEST_CASE("critic regression descends on a frozen batch") {
  Td3Agent agent(3, 2, 0.3, tiny_hp(), 4);
  std::mt19937_64 rng(19);
  const TransitionBatch batch = random_batch(3, 2, 16, rng);
  VecX target(batch.size());
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < target.size(); ++i) target(i) = noise(rng);

  std::vector<double> losses;
  for (int k = 0; k < 1000; ++k) {
    losses.push_back(agent.critic_update(batch, target).first);
  }
  int consecutive = 0, best = 0;
  for (std::size_t k = 1; k < losses.size(); ++k) {
    consecutive = losses[k] < losses[k - 1] ? consecutive + 1 : 0;
    best = std::max(best, consecutive);
  }
  CHECK(best >= 10);
  CHECK(losses.back() < 0.1 * losses.front());
}

TEST_CASE("actor update reports -mean Q1(s, pi(s)) before the step") {
  Td3Agent agent(4, 2, 0.3, tiny_hp(), 6);
  std::mt19937_64 rng(23);
  const TransitionBatch batch = random_batch(4, 2, 12, rng);

  const MatX actions = 0.3 * agent.nets().actor.forward(batch.observations);
  MatX joined(6, batch.size());
  joined.topRows(4) = batch.observations;
  joined.bottomRows(2) = actions;
  const double expected = -agent.nets().critic1.forward(joined).mean();

  const auto critic_before = agent.nets().critic1.weights();
  const double loss = agent.actor_update(batch);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
  // Critic parameters are untouched by the actor step.
  for (int l = 0; l < agent.nets().critic1.layer_count(); ++l) {
    CHECK((agent.nets().critic1.weights()[l] - critic_before[l])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("actor climbs a hand-built critic to its known optimum") {
  Hyperparams hp;
  hp.hidden_sizes = {2};
  hp.learning_rate = 3e-4;
  Td3Agent agent(1, 1, 0.3, hp, 8);
  const double a_star = 0.1;
  install_absolute_value_critic(agent.nets().critic1, a_star);

  TransitionBatch batch;
  batch.observations = MatX::Zero(1, 16);
  batch.actions = MatX::Zero(1, 16);
  batch.rewards = VecX::Zero(16);
  batch.next_observations = MatX::Zero(1, 16);
  for (int k = 0; k < 5000; ++k) agent.actor_update(batch);

  const VecX action = agent.select_action(VecX::Zero(1), 0.0);
  CHECK(std::abs(action(0) - a_star) < 1e-3);
}

TEST_CASE("actor and targets update every policy_delay training steps") {
  Hyperparams hp = tiny_hp();
  hp.batch_size = 4;
  hp.policy_delay = 2;
  Td3Agent agent(2, 1, 0.3, hp, 12);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 8; ++i) {
    agent.observe(random_transition(2, 1, 0.1 * i, rng));
  }

  for (int step = 1; step <= 6; ++step) {
    const auto actor_before = agent.nets().actor.weights();
    const auto target_before = agent.nets().target_critic1.weights();
    agent.train_step();
    double actor_change = 0.0, target_change = 0.0;
    for (int l = 0; l < agent.nets().actor.layer_count(); ++l) {
      actor_change = std::max(actor_change,
                              (agent.nets().actor.weights()[l] - actor_before[l])
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    for (int l = 0; l < agent.nets().target_critic1.layer_count(); ++l) {
      target_change =
          std::max(target_change, (agent.nets().target_critic1.weights()[l] -
                                   target_before[l])
                                      .cwiseAbs()
                                      .maxCoeff());
    }
    if (step % 2 == 0) {
      CHECK(actor_change > 0.0);
      CHECK(target_change > 0.0);
    } else {
      CHECK(actor_change == 0.0);
      CHECK(target_change == 0.0);
    }
  }
  CHECK(agent.trained_steps() == 6);
}

TEST_CASE("train_step is a no-op until the buffer holds a batch") {
  Hyperparams hp = tiny_hp();
  hp.batch_size = 4;
  Td3Agent agent(2, 1, 0.3, hp, 14);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 3; ++i) {
    agent.observe(random_transition(2, 1, 0.0, rng));
  }
  agent.train_step();
  CHECK(agent.trained_steps() == 0);
  agent.observe(random_transition(2, 1, 0.0, rng));
  agent.train_step();
  CHECK(agent.trained_steps() == 1);
}

TEST_CASE("replay buffer evicts the oldest record at capacity") {
  ReplayBuffer buffer(3);
  std::mt19937_64 rng(37);
  for (int i = 1; i <= 4; ++i) {
    Transition t = random_transition(2, 1, static_cast<double>(i), rng);
    buffer.push(std::move(t));
  }
  CHECK(buffer.size() == 3);
  bool saw[5] = {false, false, false, false, false};
  for (int round = 0; round < 100; ++round) {
    const TransitionBatch batch = buffer.sample(3, rng);
    for (int i = 0; i < batch.size(); ++i) {
      const int r = static_cast<int>(batch.rewards(i));
      REQUIRE(r >= 2);
      REQUIRE(r <= 4);
      saw[r] = true;
    }
  }
  CHECK(saw[2]);
  CHECK(saw[3]);
  CHECK(saw[4]);
}

TEST_CASE("replay sampling is uniform") {
  ReplayBuffer buffer(10);
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    buffer.push(random_transition(1, 1, static_cast<double>(i), rng));
  }
  const int rounds = 10000;
  int counts[10] = {};
  for (int round = 0; round < rounds; ++round) {
    const TransitionBatch batch = buffer.sample(10, rng);
    for (int i = 0; i < batch.size(); ++i) {
      ++counts[static_cast<int>(batch.rewards(i))];
    }
  }
  const int draws = rounds * 10;
  for (int r = 0; r < 10; ++r) {
    const double freq = static_cast<double>(counts[r]) / draws;
    CHECK(freq == doctest::Approx(0.1).epsilon(0.1));
    CHECK(std::abs(freq - 0.1) < 0.01);
  }
}

TEST_CASE("replay buffer rejects oversized samples and zero capacity") {
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);
  ReplayBuffer buffer(5);
  std::mt19937_64 rng(43);
  buffer.push(random_transition(1, 1, 0.0, rng));
  CHECK_THROWS_AS(buffer.sample(2, rng), ConfigError);
}

TEST_CASE("checkpoint round-trip restores the agent bit for bit") {
  Hyperparams hp = tiny_hp();
  hp.batch_size = 4;
  Td3Agent agent(3, 2, 0.3, hp, 50);
  std::mt19937_64 rng(47);
  for (int i = 0; i < 16; ++i) {
    agent.observe(random_transition(3, 2, 0.5, rng));
  }
  for (int k = 0; k < 10; ++k) agent.train_step();

  std::ostringstream saved;
  agent.save(saved, 0xDEADBEEFULL);

  Td3Agent restored(3, 2, 0.3, hp, 999);  // different seed -> different nets
  std::istringstream in(saved.str());
  restored.load(in, 0xDEADBEEFULL);
  CHECK(restored.trained_steps() == agent.trained_steps());

  std::ostringstream resaved;
  restored.save(resaved, 0xDEADBEEFULL);
  CHECK(resaved.str() == saved.str());
}

TEST_CASE("checkpoint load validates hash, magic, and shapes") {
  Hyperparams hp = tiny_hp();
  Td3Agent agent(3, 2, 0.3, hp, 51);
  std::ostringstream saved;
  agent.save(saved, 1234);

  Td3Agent other(3, 2, 0.3, hp, 52);
  {
    std::istringstream in(saved.str());
    CHECK_THROWS_AS(other.load(in, 4321), ConfigError);  // hash mismatch
  }
  {
    std::istringstream in(saved.str());
    other.load(in, 0);  // hash 0 skips the check
  }
  {
    std::istringstream in("not a checkpoint at all, truly");
    CHECK_THROWS_AS(other.load(in, 0), ConfigError);  // bad magic
  }
  {
    Td3Agent wrong_dims(4, 2, 0.3, hp, 53);
    std::istringstream in(saved.str());
    CHECK_THROWS_AS(wrong_dims.load(in, 0), ConfigError);
  }
  {
    Hyperparams wide = hp;
    wide.hidden_sizes = {16, 16};
    Td3Agent wrong_shape(3, 2, 0.3, wide, 54);
    std::istringstream in(saved.str());
    CHECK_THROWS_AS(wrong_shape.load(in, 0), ConfigError);
  }
}
