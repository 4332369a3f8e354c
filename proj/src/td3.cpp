#include "msr/td3.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace msr {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'R', 'T', 'D', '3', '0', '1'};

MatX stack(const MatX& top, const MatX& bottom) {
  MatX joined(top.rows() + bottom.rows(), top.cols());
  joined.topRows(top.rows()) = top;
  joined.bottomRows(bottom.rows()) = bottom;
  return joined;
}

void write_matrix(std::ostream& out, const MatX& m) {
  const std::uint64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

MatX read_matrix(std::istream& in) {
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in || rows > 1'000'000 || cols > 1'000'000) {
    throw ConfigError("checkpoint: corrupt matrix header");
  }
  MatX m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw ConfigError("checkpoint: truncated matrix payload");
  return m;
}

void write_net(std::ostream& out, const Mlp& net) {
  const std::uint64_t layers = net.layer_count();
  out.write(reinterpret_cast<const char*>(&layers), sizeof(layers));
  for (int l = 0; l < net.layer_count(); ++l) {
    write_matrix(out, net.weights()[l]);
    write_matrix(out, net.biases()[l]);
  }
}

void read_net(std::istream& in, Mlp& net) {
  std::uint64_t layers = 0;
  in.read(reinterpret_cast<char*>(&layers), sizeof(layers));
  if (static_cast<int>(layers) != net.layer_count()) {
    throw ConfigError("checkpoint: layer count mismatch");
  }
  for (int l = 0; l < net.layer_count(); ++l) {
    const MatX w = read_matrix(in);
    const MatX b = read_matrix(in);
    if (w.rows() != net.weights()[l].rows() ||
        w.cols() != net.weights()[l].cols() || b.size() != net.biases()[l].size()) {
      throw ConfigError("checkpoint: parameter shape mismatch at layer " +
                        std::to_string(l));
    }
    net.weights()[l] = w;
    net.biases()[l] = b;
  }
}

void write_adam(std::ostream& out, const AdamState& s) {
  out.write(reinterpret_cast<const char*>(&s.step), sizeof(s.step));
  for (std::size_t l = 0; l < s.weight_m.size(); ++l) {
    write_matrix(out, s.weight_m[l]);
    write_matrix(out, s.weight_v[l]);
    write_matrix(out, s.bias_m[l]);
    write_matrix(out, s.bias_v[l]);
  }
}

void read_adam(std::istream& in, AdamState& s) {
  in.read(reinterpret_cast<char*>(&s.step), sizeof(s.step));
  for (std::size_t l = 0; l < s.weight_m.size(); ++l) {
    s.weight_m[l] = read_matrix(in);
    s.weight_v[l] = read_matrix(in);
    s.bias_m[l] = read_matrix(in);
    s.bias_v[l] = read_matrix(in);
  }
}

}  // namespace

Td3Agent::Td3Agent(int obs_dim, int act_dim, double action_bound,
                   const Hyperparams& hp, std::uint64_t seed)
    : hp_(hp),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      action_bound_(action_bound),
      buffer_(hp.buffer_capacity),
      rng_(seed) {
  if (obs_dim < 1 || act_dim < 1 || action_bound <= 0.0) {
    throw ConfigError("Td3Agent: invalid dimensions or action bound");
  }
  std::vector<int> actor_sizes{obs_dim};
  std::vector<int> critic_sizes{obs_dim + act_dim};
  for (int h : hp.hidden_sizes) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(act_dim);
  critic_sizes.push_back(1);

  nets_.actor = Mlp(actor_sizes, /*tanh_output=*/true, rng_);
  nets_.critic1 = Mlp(critic_sizes, /*tanh_output=*/false, rng_);
  nets_.critic2 = Mlp(critic_sizes, /*tanh_output=*/false, rng_);
  nets_.target_actor = nets_.actor;
  nets_.target_critic1 = nets_.critic1;
  nets_.target_critic2 = nets_.critic2;

  actor_opt_ = AdamState::for_network(nets_.actor);
  critic1_opt_ = AdamState::for_network(nets_.critic1);
  critic2_opt_ = AdamState::for_network(nets_.critic2);
}

VecX Td3Agent::select_action(const VecX& observation, double noise_std) {
  VecX action = action_bound_ * nets_.actor.forward(observation);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (int i = 0; i < action.size(); ++i) action(i) += noise(rng_);
  }
  return action.cwiseMax(-action_bound_).cwiseMin(action_bound_);
}

VecX Td3Agent::random_action() {
  std::uniform_real_distribution<double> uniform(-action_bound_, action_bound_);
  VecX action(act_dim_);
  for (int i = 0; i < act_dim_; ++i) action(i) = uniform(rng_);
  return action;
}

VecX Td3Agent::td_target(const TransitionBatch& batch) {
  const int n = batch.size();
  MatX next_actions =
      action_bound_ * nets_.target_actor.forward(batch.next_observations);
  const double sigma = hp_.target_noise * action_bound_;
  const double clip = hp_.noise_clip * action_bound_;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < next_actions.rows(); ++r) {
        next_actions(r, c) += std::clamp(noise(rng_), -clip, clip);
      }
    }
  }
  next_actions =
      next_actions.cwiseMax(-action_bound_).cwiseMin(action_bound_);

  const MatX joined = stack(batch.next_observations, next_actions);
  const MatX q1 = nets_.target_critic1.forward(joined);
  const MatX q2 = nets_.target_critic2.forward(joined);
  VecX target(n);
  for (int i = 0; i < n; ++i) {
    target(i) =
        batch.rewards(i) + hp_.discount * std::min(q1(0, i), q2(0, i));
  }
  return target;
}

std::pair<double, double> Td3Agent::critic_update(const TransitionBatch& batch,
                                                  const VecX& target) {
  const int n = batch.size();
  const MatX joined = stack(batch.observations, batch.actions);

  const auto update_one = [&](Mlp& critic, AdamState& opt) {
    Mlp::Workspace ws;
    const MatX q = critic.forward(joined, ws);
    const MatX residual = q - target.transpose();
    const double loss = residual.array().square().mean();
    if (!std::isfinite(loss)) {
      throw InstabilityError("critic_update: non-finite loss");
    }
    Mlp::Gradients grads = critic.zero_gradients();
    critic.backward(ws, (2.0 / n) * residual, grads);
    adam_step(critic, grads, opt, hp_.learning_rate);
    return loss;
  };

  const double loss1 = update_one(nets_.critic1, critic1_opt_);
  const double loss2 = update_one(nets_.critic2, critic2_opt_);
  return {loss1, loss2};
}

double Td3Agent::actor_update(const TransitionBatch& batch) {
  const int n = batch.size();
  Mlp::Workspace actor_ws;
  const MatX actions =
      action_bound_ * nets_.actor.forward(batch.observations, actor_ws);

  Mlp::Workspace critic_ws;
  const MatX q = nets_.critic1.forward(stack(batch.observations, actions),
                                       critic_ws);
  const double loss = -q.mean();
  if (!std::isfinite(loss)) {
    throw InstabilityError("actor_update: non-finite loss");
  }

  // d(-mean Q1)/d(input) through the critic; only the action rows flow back
  // into the actor, and the critic parameters stay untouched.
  Mlp::Gradients scratch = nets_.critic1.zero_gradients();
  const MatX input_grad = nets_.critic1.backward(
      critic_ws, MatX::Constant(1, n, -1.0 / n), scratch);
  const MatX action_grad =
      action_bound_ * input_grad.bottomRows(act_dim_);

  Mlp::Gradients actor_grads = nets_.actor.zero_gradients();
  nets_.actor.backward(actor_ws, action_grad, actor_grads);
  adam_step(nets_.actor, actor_grads, actor_opt_, hp_.learning_rate);
  return loss;
}

void Td3Agent::update_targets() {
  polyak_update(nets_.target_actor, nets_.actor, hp_.polyak);
  polyak_update(nets_.target_critic1, nets_.critic1, hp_.polyak);
  polyak_update(nets_.target_critic2, nets_.critic2, hp_.polyak);
}

std::pair<double, double> Td3Agent::train_step() {
  if (buffer_.size() < static_cast<std::size_t>(hp_.batch_size)) {
    return {0.0, 0.0};
  }
  const TransitionBatch batch = buffer_.sample(hp_.batch_size, rng_);
  const VecX target = td_target(batch);
  const auto losses = critic_update(batch, target);
  ++trained_steps_;
  if (trained_steps_ % hp_.policy_delay == 0) {
    actor_update(batch);
    update_targets();
  }
  return losses;
}

void Td3Agent::save(std::ostream& out, std::uint64_t config_hash) const {
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&config_hash), sizeof(config_hash));
  const std::int64_t header[3] = {obs_dim_, act_dim_, trained_steps_};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(&action_bound_), sizeof(action_bound_));
  write_net(out, nets_.actor);
  write_net(out, nets_.critic1);
  write_net(out, nets_.critic2);
  write_net(out, nets_.target_actor);
  write_net(out, nets_.target_critic1);
  write_net(out, nets_.target_critic2);
  write_adam(out, actor_opt_);
  write_adam(out, critic1_opt_);
  write_adam(out, critic2_opt_);
}

void Td3Agent::load(std::istream& in, std::uint64_t expected_config_hash) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic)) {
    throw ConfigError("checkpoint: bad magic");
  }
  std::uint64_t hash = 0;
  in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  if (expected_config_hash != 0 && hash != expected_config_hash) {
    throw ConfigError("checkpoint: config hash mismatch");
  }
  std::int64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (header[0] != obs_dim_ || header[1] != act_dim_) {
    throw ConfigError("checkpoint: observation/action dimensions mismatch");
  }
  trained_steps_ = header[2];
  double bound = 0.0;
  in.read(reinterpret_cast<char*>(&bound), sizeof(bound));
  action_bound_ = bound;
  read_net(in, nets_.actor);
  read_net(in, nets_.critic1);
  read_net(in, nets_.critic2);
  read_net(in, nets_.target_actor);
  read_net(in, nets_.target_critic1);
  read_net(in, nets_.target_critic2);
  read_adam(in, actor_opt_);
  read_adam(in, critic1_opt_);
  read_adam(in, critic2_opt_);
}

}  // namespace msr
