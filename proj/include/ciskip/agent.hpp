#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ciskip/dataset.hpp"
#include "ciskip/neural.hpp"
#include "ciskip/replay.hpp"
#include "ciskip/tree.hpp"
#include "json.hpp"

namespace ciskip {

struct AgentConfig {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Fraction of all environment steps over which epsilon decays linearly.
  double epsilon_decay_fraction = 0.5;
  double lr_q = 1e-3;
  double lr_x = 1e-3;
  std::vector<std::size_t> hidden_q = {128, 64};
  std::vector<std::size_t> hidden_x = {128, 64};
  std::size_t batch_size = 32;
  std::size_t warmup_steps = 128;
  /// Hard sync of the target attributes-network every N updates; 1 keeps it
  /// identical to the online network.
  std::size_t target_sync_period = 100;
  std::size_t replay_capacity = 10000;
  double per_alpha = 0.6;
  double per_beta_start = 0.4;
  double per_beta_end = 1.0;
  double priority_floor = 0.01;

  /// Throws on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig defaults = {});

struct ActionChoice {
  Action action;
  /// Normalised proposals in [0,1], executed threshold substituted at the
  /// chosen attribute.
  std::vector<double> parameters;
  bool explored = false;
};

struct UpdateResult {
  double loss_q = 0.0;
  double loss_x = 0.0;
  std::vector<double> td_errors;
};

/// Parameterised deep Q-learning agent. The thresholds-network proposes one
/// threshold per attribute; the attributes-network scores every attribute
/// given the state and all proposals in a single pass.
class Agent {
 public:
  Agent() = default;
  Agent(const FeatureSchema& schema, std::size_t state_width, const AgentConfig& cfg, std::uint64_t seed);

  const AgentConfig& config() const { return cfg_; }
  std::size_t feature_count() const { return schema_.size(); }
  std::size_t state_width() const { return state_width_; }
  std::uint64_t update_count() const { return updates_; }

  /// Proposals on the logistic scale, one per attribute.
  std::vector<double> predict_unit_thresholds(const TreeState& s) const;
  /// Proposals mapped into each attribute's schema range.
  std::vector<double> predict_thresholds(const TreeState& s) const;
  /// Q-values given range-normalised proposals.
  std::vector<double> q_values(const TreeState& s, const std::vector<double>& unit_thresholds,
                               bool use_target = false) const;

  ActionChoice select_action(const TreeState& s, double epsilon, std::mt19937_64& rng) const;

  /// r when terminal, otherwise gamma * max_k Q_target(s', X(s')). A
  /// non-terminal transition must carry zero reward.
  double td_target(const Transition& tr) const;

  /// One Adam step on the squared TD loss (attributes-network) followed by one
  /// on -sum_k Q_k (thresholds-network, attributes-network frozen).
  UpdateResult update(const std::vector<const Transition*>& batch, const std::vector<double>& weights);

  void sync_target();

  neural::Network& thresholds_net() { return thresholds_net_; }
  neural::Network& attributes_net() { return attributes_net_; }
  const neural::Network& thresholds_net() const { return thresholds_net_; }
  const neural::Network& attributes_net() const { return attributes_net_; }
  const neural::Network& target_attributes_net() const { return target_net_; }

  nlohmann::json to_json() const;
  static Agent from_json(const nlohmann::json& j, const FeatureSchema& schema);

 private:
  std::vector<double> q_input(const TreeState& s, const std::vector<double>& unit_thresholds) const;

  FeatureSchema schema_;
  std::size_t state_width_ = 0;
  AgentConfig cfg_;
  neural::Network thresholds_net_;
  neural::Network attributes_net_;
  neural::Network target_net_;
  neural::AdamState adam_x_;
  neural::AdamState adam_q_;
  std::uint64_t updates_ = 0;
};

/// Index of the largest value; the lowest index wins ties.
std::size_t argmax(const std::vector<double>& values);

}  // namespace ciskip
