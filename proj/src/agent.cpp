#include "ciskip/agent.hpp"

#include <algorithm>
#include <cmath>

namespace ciskip {

using neural::Activation;

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("gamma must lie in [0,1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
    throw Error("epsilon schedule must satisfy 0 <= end <= start <= 1");
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0))
    throw Error("epsilon decay fraction must lie in (0,1]");
  if (!(lr_q >= 0.0 && lr_x >= 0.0)) throw Error("learning rates must be non-negative");
  if (batch_size == 0 || replay_capacity == 0 || target_sync_period == 0)
    throw Error("batch size, replay capacity and target sync period must be positive");
  if (batch_size > replay_capacity) throw Error("batch size exceeds replay capacity");
  for (auto h : hidden_q)
    if (h == 0) throw Error("zero-width hidden layer");
  for (auto h : hidden_x)
    if (h == 0) throw Error("zero-width hidden layer");
  if (per_alpha < 0.0 || per_beta_start < 0.0 || per_beta_end < 0.0) throw Error("PER exponents must be non-negative");
  if (!(priority_floor > 0.0)) throw Error("priority floor must be positive");
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"gamma", c.gamma},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},
          {"epsilon_decay_fraction", c.epsilon_decay_fraction},
          {"lr_q", c.lr_q},
          {"lr_x", c.lr_x},
          {"hidden_q", c.hidden_q},
          {"hidden_x", c.hidden_x},
          {"batch_size", c.batch_size},
          {"warmup_steps", c.warmup_steps},
          {"target_sync_period", c.target_sync_period},
          {"replay_capacity", c.replay_capacity},
          {"per_alpha", c.per_alpha},
          {"per_beta_start", c.per_beta_start},
          {"per_beta_end", c.per_beta_end},
          {"priority_floor", c.priority_floor}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig c) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  take("gamma", c.gamma);
  take("epsilon_start", c.epsilon_start);
  take("epsilon_end", c.epsilon_end);
  take("epsilon_decay_fraction", c.epsilon_decay_fraction);
  take("lr_q", c.lr_q);
  take("lr_x", c.lr_x);
  take("hidden_q", c.hidden_q);
  take("hidden_x", c.hidden_x);
  take("batch_size", c.batch_size);
  take("warmup_steps", c.warmup_steps);
  take("target_sync_period", c.target_sync_period);
  take("replay_capacity", c.replay_capacity);
  take("per_alpha", c.per_alpha);
  take("per_beta_start", c.per_beta_start);
  take("per_beta_end", c.per_beta_end);
  take("priority_floor", c.priority_floor);
  c.validate();
  return c;
}

std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Agent::Agent(const FeatureSchema& schema, std::size_t state_width, const AgentConfig& cfg, std::uint64_t seed)
    : schema_(schema), state_width_(state_width), cfg_(cfg) {
  cfg_.validate();
  const std::size_t k = schema.size();
  std::vector<std::size_t> xs{state_width};
  xs.insert(xs.end(), cfg.hidden_x.begin(), cfg.hidden_x.end());
  xs.push_back(k);
  std::vector<std::size_t> qs{state_width + k};
  qs.insert(qs.end(), cfg.hidden_q.begin(), cfg.hidden_q.end());
  qs.push_back(k);
  thresholds_net_ = neural::init_network(xs, Activation::Relu, Activation::Logistic, seed);
  attributes_net_ = neural::init_network(qs, Activation::Relu, Activation::Identity, seed ^ 0x9e3779b97f4a7c15ULL);
  target_net_ = attributes_net_;
  adam_x_ = neural::AdamState::zeros_like(thresholds_net_);
  adam_q_ = neural::AdamState::zeros_like(attributes_net_);
}

std::vector<double> Agent::predict_unit_thresholds(const TreeState& s) const {
  if (s.size() != state_width_) throw Error("state width mismatch");
  return neural::forward(thresholds_net_, s);
}

std::vector<double> Agent::predict_thresholds(const TreeState& s) const {
  auto x = predict_unit_thresholds(s);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = schema_[k].denormalize(x[k]);
  return x;
}

std::vector<double> Agent::q_input(const TreeState& s, const std::vector<double>& unit_thresholds) const {
  if (s.size() != state_width_) throw Error("state width mismatch");
  if (unit_thresholds.size() != schema_.size()) throw Error("threshold vector width mismatch");
  std::vector<double> in;
  in.reserve(s.size() + unit_thresholds.size());
  in.insert(in.end(), s.begin(), s.end());
  in.insert(in.end(), unit_thresholds.begin(), unit_thresholds.end());
  return in;
}

std::vector<double> Agent::q_values(const TreeState& s, const std::vector<double>& unit_thresholds,
                                    bool use_target) const {
  return neural::forward(use_target ? target_net_ : attributes_net_, q_input(s, unit_thresholds));
}

ActionChoice Agent::select_action(const TreeState& s, double epsilon, std::mt19937_64& rng) const {
  ActionChoice choice;
  choice.parameters = predict_unit_thresholds(s);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, schema_.size() - 1);
    const std::size_t k = pick(rng);
    const double u = unit(rng);
    choice.action = {k, schema_[k].denormalize(u)};
    choice.parameters[k] = schema_[k].span() > 0.0 ? u : 0.0;
    choice.explored = true;
    return choice;
  }
  const std::size_t k = argmax(q_values(s, choice.parameters));
  choice.action = {k, schema_[k].denormalize(choice.parameters[k])};
  return choice;
}

double Agent::td_target(const Transition& tr) const {
  if (tr.terminal) return tr.reward;
  if (tr.reward != 0.0) throw Error("non-terminal transition carries a nonzero reward");
  const auto x = predict_unit_thresholds(tr.next_state);
  const auto q = q_values(tr.next_state, x, true);
  return cfg_.gamma * *std::max_element(q.begin(), q.end());
}

UpdateResult Agent::update(const std::vector<const Transition*>& batch, const std::vector<double>& weights) {
  if (batch.empty()) throw Error("empty update batch");
  if (weights.size() != batch.size()) throw Error("importance weight count mismatch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t k = schema_.size();
  UpdateResult out;
  out.td_errors.resize(batch.size());

  // Attributes-network: importance-weighted squared TD error on the taken
  // attribute's output.
  auto grad_q = neural::Gradients::zeros_like(attributes_net_);
  neural::Cache cache;
  std::vector<double> dq(k, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = *batch[i];
    const double y = td_target(tr);
    const auto q = neural::forward(attributes_net_, q_input(tr.state, tr.parameters), &cache);
    const std::size_t a = tr.action.attribute;
    const double delta = y - q[a];
    out.td_errors[i] = delta;
    out.loss_q += weights[i] * delta * delta * inv_b;
    std::fill(dq.begin(), dq.end(), 0.0);
    dq[a] = -2.0 * weights[i] * delta * inv_b;
    neural::backward_into(attributes_net_, cache, dq, grad_q);
  }
  neural::adam_step(attributes_net_, grad_q, adam_q_, {cfg_.lr_q});

  // Thresholds-network: maximise the summed Q-values of its own proposals,
  // differentiating through the frozen attributes-network.
  auto grad_x = neural::Gradients::zeros_like(thresholds_net_);
  auto scratch_q = neural::Gradients::zeros_like(attributes_net_);
  neural::Cache xcache;
  std::vector<double> dx(k);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = *batch[i];
    const auto x = neural::forward(thresholds_net_, tr.state, &xcache);
    const auto q = neural::forward(attributes_net_, q_input(tr.state, x), &cache);
    double sum_q = 0.0;
    for (double v : q) sum_q += v;
    out.loss_x += -weights[i] * sum_q * inv_b;
    std::fill(dq.begin(), dq.end(), -weights[i] * inv_b);
    std::fill(scratch_q.input.begin(), scratch_q.input.end(), 0.0);
    neural::backward_into(attributes_net_, cache, dq, scratch_q);
    for (std::size_t j = 0; j < k; ++j) dx[j] = scratch_q.input[state_width_ + j];
    neural::backward_into(thresholds_net_, xcache, dx, grad_x);
  }
  neural::adam_step(thresholds_net_, grad_x, adam_x_, {cfg_.lr_x});

  ++updates_;
  if (updates_ % cfg_.target_sync_period == 0) sync_target();
  return out;
}

void Agent::sync_target() { target_net_ = attributes_net_; }

nlohmann::json Agent::to_json() const {
  return {{"config", ciskip::to_json(cfg_)},
          {"state_width", state_width_},
          {"updates", updates_},
          {"thresholds_net", neural::to_json(thresholds_net_)},
          {"attributes_net", neural::to_json(attributes_net_)},
          {"target_attributes_net", neural::to_json(target_net_)},
          {"adam_x", neural::to_json(adam_x_)},
          {"adam_q", neural::to_json(adam_q_)}};
}

Agent Agent::from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  Agent a;
  a.schema_ = schema;
  a.cfg_ = agent_config_from_json(j.at("config"));
  a.state_width_ = j.at("state_width").get<std::size_t>();
  a.updates_ = j.at("updates").get<std::uint64_t>();
  a.thresholds_net_ = neural::network_from_json(j.at("thresholds_net"));
  a.attributes_net_ = neural::network_from_json(j.at("attributes_net"));
  a.target_net_ = neural::network_from_json(j.at("target_attributes_net"));
  a.adam_x_ = neural::adam_state_from_json(j.at("adam_x"));
  a.adam_q_ = neural::adam_state_from_json(j.at("adam_q"));
  const std::size_t k = schema.size();
  if (a.thresholds_net_.input_size() != a.state_width_ || a.thresholds_net_.output_size() != k ||
      a.attributes_net_.input_size() != a.state_width_ + k || a.attributes_net_.output_size() != k ||
      !(a.target_net_.input_size() == a.attributes_net_.input_size() &&
        a.target_net_.output_size() == k))
    throw Error("checkpoint network shapes do not match the schema");
  return a;
}

}  // namespace ciskip
