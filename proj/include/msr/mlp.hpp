#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "msr/types.hpp"

namespace msr {

/// Explicit-parameter feedforward network: affine layers with ReLU hidden
/// activations and an optional tanh output. Batches are column-major
/// (one sample per column), double precision throughout.
class Mlp {
 public:
  Mlp() = default;
  /// layer_sizes = {in, hidden..., out}. Weights use He-uniform init.
  Mlp(const std::vector<int>& layer_sizes, bool tanh_output,
      std::mt19937_64& rng);

  VecX forward(const VecX& input) const;
  MatX forward(const MatX& inputs) const;

  /// Forward pass that caches activations for a later backward pass.
  struct Workspace {
    std::vector<MatX> pre_activations;   // per layer
    std::vector<MatX> activations;       // input + per layer
  };
  MatX forward(const MatX& inputs, Workspace& ws) const;

  /// Reverse-mode gradients of a scalar loss given dL/d(output), averaged
  /// nowhere (the caller owns any 1/batch factor). Returns dL/d(input).
  struct Gradients {
    std::vector<MatX> weights;
    std::vector<VecX> biases;
  };
  MatX backward(const Workspace& ws, const MatX& output_grad,
                Gradients& grads) const;

  Gradients zero_gradients() const;

  int input_size() const;
  int output_size() const;
  int layer_count() const { return static_cast<int>(weights_.size()); }

  std::vector<MatX>& weights() { return weights_; }
  std::vector<VecX>& biases() { return biases_; }
  const std::vector<MatX>& weights() const { return weights_; }
  const std::vector<VecX>& biases() const { return biases_; }
  bool tanh_output() const { return tanh_output_; }

 private:
  std::vector<MatX> weights_;
  std::vector<VecX> biases_;
  bool tanh_output_ = false;
};

/// Bias-corrected adaptive-moment optimizer state for one network.
struct AdamState {
  std::vector<MatX> weight_m, weight_v;
  std::vector<VecX> bias_m, bias_v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const Mlp& net);
};

/// One optimizer step on the network's parameters.
void adam_step(Mlp& net, const Mlp::Gradients& grads, AdamState& state,
               double learning_rate);

/// theta' <- tau * theta + (1 - tau) * theta' per parameter.
void polyak_update(Mlp& target, const Mlp& online, double tau);

}  // namespace msr
