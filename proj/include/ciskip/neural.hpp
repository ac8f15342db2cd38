#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace ciskip::neural {

enum class Activation : std::uint8_t { Identity, Relu, Logistic };

const char* to_string(Activation act);
Activation activation_from_string(const std::string& text);

/// Dense layer, weights row-major out x in.
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

  bool operator==(const Layer&) const = default;
};

struct Network {
  std::vector<Layer> layers;
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;

  std::size_t input_size() const { return layers.front().in; }
  std::size_t output_size() const { return layers.back().out; }
  std::size_t parameter_count() const;

  bool operator==(const Network&) const = default;
};

/// Parameter-shaped gradient buffers plus the gradient w.r.t. the input of
/// the last backward pass.
struct Gradients {
  std::vector<Layer> layers;
  std::vector<double> input;

  /// Zero gradients congruent with `net`.
  static Gradients zeros_like(const Network& net);
  void add(const Gradients& other);
  void scale(double factor);
};

/// Values recorded by forward() for one backward().
struct Cache {
  std::vector<std::vector<double>> inputs;       // input of each layer
  std::vector<std::vector<double>> activations;  // post-activation output of each layer
};

/// Glorot-uniform weights, zero biases.
Network init_network(const std::vector<std::size_t>& layer_sizes, Activation hidden,
                     Activation output, std::uint64_t seed);

std::vector<double> forward(const Network& net, std::span<const double> input, Cache* cache = nullptr);

/// Reverse-mode gradient of <output, output_gradient> w.r.t. every parameter
/// and the input.
Gradients backward(const Network& net, const Cache& cache, std::span<const double> output_gradient);

/// Accumulating variant: adds into `grads` (shape-checked).
void backward_into(const Network& net, const Cache& cache, std::span<const double> output_gradient,
                   Gradients& grads);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Layer> m;
  std::vector<Layer> v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const Network& net);
};

void adam_step(Network& net, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AdamState& state);
AdamState adam_state_from_json(const nlohmann::json& j);

}  // namespace ciskip::neural
