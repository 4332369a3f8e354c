#include "msr/mlp.hpp"

#include <cmath>

namespace msr {

Mlp::Mlp(const std::vector<int>& layer_sizes, bool tanh_output,
         std::mt19937_64& rng)
    : tanh_output_(tanh_output) {
  if (layer_sizes.size() < 2) {
    throw ConfigError("Mlp: need at least input and output sizes");
  }
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    if (in < 1 || out < 1) throw ConfigError("Mlp: layer sizes must be >= 1");
    const double bound = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    MatX w(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) w(r, c) = dist(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(VecX::Zero(out));
  }
}

int Mlp::input_size() const {
  return static_cast<int>(weights_.front().cols());
}

int Mlp::output_size() const {
  return static_cast<int>(weights_.back().rows());
}

MatX Mlp::forward(const MatX& inputs, Workspace& ws) const {
  if (inputs.rows() != input_size()) {
    throw ConfigError("Mlp: input width " + std::to_string(inputs.rows()) +
                      " does not match network input " +
                      std::to_string(input_size()));
  }
  const int layers = layer_count();
  ws.pre_activations.assign(layers, MatX());
  ws.activations.assign(layers + 1, MatX());
  ws.activations[0] = inputs;
  for (int l = 0; l < layers; ++l) {
    ws.pre_activations[l] =
        (weights_[l] * ws.activations[l]).colwise() + biases_[l];
    if (l + 1 < layers) {
      ws.activations[l + 1] = ws.pre_activations[l].cwiseMax(0.0);
    } else if (tanh_output_) {
      ws.activations[l + 1] = ws.pre_activations[l].array().tanh();
    } else {
      ws.activations[l + 1] = ws.pre_activations[l];
    }
  }
  return ws.activations[layers];
}

MatX Mlp::forward(const MatX& inputs) const {
  Workspace ws;
  return forward(inputs, ws);
}

VecX Mlp::forward(const VecX& input) const {
  return forward(MatX(input)).col(0);
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& w : weights_) g.weights.push_back(MatX::Zero(w.rows(), w.cols()));
  for (const auto& b : biases_) g.biases.push_back(VecX::Zero(b.size()));
  return g;
}

MatX Mlp::backward(const Workspace& ws, const MatX& output_grad,
                   Gradients& grads) const {
  const int layers = layer_count();
  MatX delta = output_grad;
  for (int l = layers - 1; l >= 0; --l) {
    if (l == layers - 1) {
      if (tanh_output_) {
        delta = delta.cwiseProduct(
            (1.0 - ws.activations[layers].array().square()).matrix());
      }
    } else {
      delta = delta.cwiseProduct(
          (ws.pre_activations[l].array() > 0.0).cast<double>().matrix());
    }
    grads.weights[l] += delta * ws.activations[l].transpose();
    grads.biases[l] += delta.rowwise().sum();
    if (l > 0) delta = weights_[l].transpose() * delta;
  }
  return weights_[0].transpose() * delta;
}

AdamState AdamState::for_network(const Mlp& net) {
  AdamState s;
  for (const auto& w : net.weights()) {
    s.weight_m.push_back(MatX::Zero(w.rows(), w.cols()));
    s.weight_v.push_back(MatX::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.biases()) {
    s.bias_m.push_back(VecX::Zero(b.size()));
    s.bias_v.push_back(VecX::Zero(b.size()));
  }
  return s;
}

namespace {

template <typename Param, typename Grad>
void adam_update(Param& p, const Grad& g, Param& m, Param& v, double lr,
                 double b1, double b2, double eps, long t) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v.array().matrix() + (1.0 - b2) * g.array().square().matrix();
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  p.array() -= lr * (m.array() / correction1) /
               ((v.array() / correction2).sqrt() + eps);
}

}  // namespace

void adam_step(Mlp& net, const Mlp::Gradients& grads, AdamState& state,
               double learning_rate) {
  ++state.step;
  for (int l = 0; l < net.layer_count(); ++l) {
    adam_update(net.weights()[l], grads.weights[l], state.weight_m[l],
                state.weight_v[l], learning_rate, state.beta1, state.beta2,
                state.epsilon, state.step);
    adam_update(net.biases()[l], grads.biases[l], state.bias_m[l],
                state.bias_v[l], learning_rate, state.beta1, state.beta2,
                state.epsilon, state.step);
  }
}

void polyak_update(Mlp& target, const Mlp& online, double tau) {
  if (target.layer_count() != online.layer_count()) {
    throw ConfigError("polyak_update: mismatched layer counts");
  }
  for (int l = 0; l < target.layer_count(); ++l) {
    if (target.weights()[l].rows() != online.weights()[l].rows() ||
        target.weights()[l].cols() != online.weights()[l].cols()) {
      throw ConfigError("polyak_update: mismatched shapes at layer " +
                        std::to_string(l));
    }
    target.weights()[l] = tau * online.weights()[l] + (1.0 - tau) * target.weights()[l];
    target.biases()[l] = tau * online.biases()[l] + (1.0 - tau) * target.biases()[l];
  }
}

}  // namespace msr
