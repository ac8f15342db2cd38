#include "ciskip/neural.hpp"

#include <cmath>
#include <random>

#include "ciskip/dataset.hpp"

namespace ciskip::neural {

namespace {

double activate(Activation act, double z) {
  switch (act) {
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Logistic: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Identity: return z;
  }
  return z;
}

// Derivative expressed through the activation value a = f(z).
double activate_grad(Activation act, double a) {
  switch (act) {
    case Activation::Relu: return a > 0.0 ? 1.0 : 0.0;
    case Activation::Logistic: return a * (1.0 - a);
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

Layer zero_layer(const Layer& like) {
  Layer l;
  l.in = like.in;
  l.out = like.out;
  l.weights.assign(like.weights.size(), 0.0);
  l.bias.assign(like.bias.size(), 0.0);
  return l;
}

void check_congruent(const std::vector<Layer>& a, const std::vector<Layer>& b) {
  if (a.size() != b.size()) throw Error("gradient shape mismatch: layer count");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].in != b[i].in || a[i].out != b[i].out) throw Error("gradient shape mismatch: layer " + std::to_string(i));
}

nlohmann::json layers_to_json(const std::vector<Layer>& layers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : layers)
    arr.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  return arr;
}

std::vector<Layer> layers_from_json(const nlohmann::json& arr) {
  std::vector<Layer> out;
  for (const auto& j : arr) {
    Layer l;
    l.in = j.at("in").get<std::size_t>();
    l.out = j.at("out").get<std::size_t>();
    l.weights = j.at("weights").get<std::vector<double>>();
    l.bias = j.at("bias").get<std::vector<double>>();
    if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) throw Error("malformed layer in JSON");
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace

const char* to_string(Activation act) {
  switch (act) {
    case Activation::Relu: return "relu";
    case Activation::Logistic: return "logistic";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& text) {
  if (text == "relu") return Activation::Relu;
  if (text == "logistic") return Activation::Logistic;
  if (text == "identity") return Activation::Identity;
  throw Error("unknown activation '" + text + "'");
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const auto& l : net.layers) g.layers.push_back(zero_layer(l));
  g.input.assign(net.input_size(), 0.0);
  return g;
}

void Gradients::add(const Gradients& other) {
  check_congruent(layers, other.layers);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (std::size_t p = 0; p < layers[i].weights.size(); ++p) layers[i].weights[p] += other.layers[i].weights[p];
    for (std::size_t p = 0; p < layers[i].bias.size(); ++p) layers[i].bias[p] += other.layers[i].bias[p];
  }
  for (std::size_t p = 0; p < input.size() && p < other.input.size(); ++p) input[p] += other.input[p];
}

void Gradients::scale(double factor) {
  for (auto& l : layers) {
    for (double& w : l.weights) w *= factor;
    for (double& b : l.bias) b *= factor;
  }
  for (double& x : input) x *= factor;
}

Network init_network(const std::vector<std::size_t>& layer_sizes, Activation hidden,
                     Activation output, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw Error("a network needs at least an input and an output size");
  for (auto s : layer_sizes)
    if (s == 0) throw Error("zero-width layer");
  std::mt19937_64 rng(seed);
  Network net;
  net.hidden = hidden;
  net.output = output;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    Layer l;
    l.in = layer_sizes[i];
    l.out = layer_sizes[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.weights.resize(l.in * l.out);
    for (double& w : l.weights) w = dist(rng);
    l.bias.assign(l.out, 0.0);
    net.layers.push_back(std::move(l));
  }
  return net;
}

std::vector<double> forward(const Network& net, std::span<const double> input, Cache* cache) {
  if (input.size() != net.input_size())
    throw Error("network input has " + std::to_string(input.size()) + " values, expected " +
                std::to_string(net.input_size()));
  if (cache) {
    cache->inputs.clear();
    cache->activations.clear();
  }
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& l = net.layers[li];
    const Activation act = li + 1 == net.layers.size() ? net.output : net.hidden;
    std::vector<double> y(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* row = &l.weights[o * l.in];
      double z = l.bias[o];
      for (std::size_t i = 0; i < l.in; ++i) z += row[i] * x[i];
      y[o] = activate(act, z);
    }
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->activations.push_back(y);
    }
    x = std::move(y);
  }
  return x;
}

void backward_into(const Network& net, const Cache& cache, std::span<const double> output_gradient,
                   Gradients& grads) {
  if (cache.inputs.size() != net.layers.size() || cache.activations.size() != net.layers.size())
    throw Error("stale cache: layer count differs from the network");
  if (output_gradient.size() != net.output_size()) throw Error("output gradient width mismatch");
  check_congruent(grads.layers, net.layers);

  std::vector<double> upstream(output_gradient.begin(), output_gradient.end());
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const Layer& l = net.layers[li];
    const Activation act = li + 1 == net.layers.size() ? net.output : net.hidden;
    const auto& x = cache.inputs[li];
    const auto& a = cache.activations[li];
    if (x.size() != l.in || a.size() != l.out) throw Error("stale cache: shape differs from the network");

    Layer& g = grads.layers[li];
    std::vector<double> down(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double dz = upstream[o] * activate_grad(act, a[o]);
      if (dz == 0.0) continue;
      g.bias[o] += dz;
      double* grow = &g.weights[o * l.in];
      const double* wrow = &l.weights[o * l.in];
      for (std::size_t i = 0; i < l.in; ++i) {
        grow[i] += dz * x[i];
        down[i] += dz * wrow[i];
      }
    }
    upstream = std::move(down);
  }
  grads.input.resize(upstream.size(), 0.0);
  for (std::size_t i = 0; i < upstream.size(); ++i) grads.input[i] += upstream[i];
}

Gradients backward(const Network& net, const Cache& cache, std::span<const double> output_gradient) {
  Gradients g = Gradients::zeros_like(net);
  backward_into(net, cache, output_gradient, g);
  return g;
}

AdamState AdamState::zeros_like(const Network& net) {
  AdamState s;
  for (const auto& l : net.layers) {
    s.m.push_back(zero_layer(l));
    s.v.push_back(zero_layer(l));
  }
  return s;
}

void adam_step(Network& net, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
  check_congruent(net.layers, grads.layers);
  check_congruent(net.layers, state.m);
  check_congruent(net.layers, state.v);
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  };
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    update(net.layers[li].weights, grads.layers[li].weights, state.m[li].weights, state.v[li].weights);
    update(net.layers[li].bias, grads.layers[li].bias, state.m[li].bias, state.v[li].bias);
  }
}

nlohmann::json to_json(const Network& net) {
  return {{"hidden", to_string(net.hidden)}, {"output", to_string(net.output)}, {"layers", layers_to_json(net.layers)}};
}

Network network_from_json(const nlohmann::json& j) {
  Network net;
  net.hidden = activation_from_string(j.at("hidden").get<std::string>());
  net.output = activation_from_string(j.at("output").get<std::string>());
  net.layers = layers_from_json(j.at("layers"));
  if (net.layers.empty()) throw Error("network without layers");
  for (std::size_t i = 1; i < net.layers.size(); ++i)
    if (net.layers[i].in != net.layers[i - 1].out) throw Error("network layer sizes do not chain");
  return net;
}

nlohmann::json to_json(const AdamState& state) {
  return {{"step", state.step}, {"m", layers_to_json(state.m)}, {"v", layers_to_json(state.v)}};
}

AdamState adam_state_from_json(const nlohmann::json& j) {
  AdamState s;
  s.step = j.at("step").get<std::uint64_t>();
  s.m = layers_from_json(j.at("m"));
  s.v = layers_from_json(j.at("v"));
  return s;
}

}  // namespace ciskip::neural
