#include "ciskip/trainer.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "ciskip/model_io.hpp"

namespace ciskip {

void TrainConfig::validate() const {
  if (depth < 1 || depth > 12) throw Error("depth must lie in [1,12]");
  if (episodes < 1) throw Error("at least one episode is required");
  if (conv_passes < 0) throw Error("convolution passes must be non-negative");
  agent.validate();
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"depth", cfg.depth},
          {"episodes", cfg.episodes},
          {"agent", to_json(cfg.agent)},
          {"reward_metric", cfg.reward_metric == RewardMetric::F1 ? "F1" : "AUC"},
          {"eval_each_episode", cfg.eval_each_episode},
          {"conv_passes", cfg.conv_passes},
          {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (j.contains("depth")) c.depth = j.at("depth").get<int>();
  if (j.contains("episodes")) c.episodes = j.at("episodes").get<std::size_t>();
  if (j.contains("agent")) c.agent = agent_config_from_json(j.at("agent"), c.agent);
  if (j.contains("reward_metric")) {
    const auto m = j.at("reward_metric").get<std::string>();
    if (m == "F1") c.reward_metric = RewardMetric::F1;
    else if (m == "AUC") c.reward_metric = RewardMetric::Auc;
    else throw Error("reward_metric must be F1 or AUC");
  }
  if (j.contains("eval_each_episode")) c.eval_each_episode = j.at("eval_each_episode").get<bool>();
  if (j.contains("conv_passes")) c.conv_passes = j.at("conv_passes").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig defaults) {
  try {
    return train_config_from_json(nlohmann::json::parse(read_text(path)), defaults);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid config '" + path.string() + "': " + e.what());
  }
}

nlohmann::json history_to_json(const TrainReport& report) {
  nlohmann::json episodes = nlohmann::json::array();
  for (const auto& e : report.history)
    episodes.push_back({{"train_metric", e.train_metric},
                        {"reward", e.reward},
                        {"epsilon", e.epsilon},
                        {"loss_q", e.loss_q},
                        {"loss_x", e.loss_x}});
  return {{"initial_metric", report.initial_metric},
          {"best_train_f1", report.best_train_f1},
          {"transitions", report.transitions},
          {"episodes", episodes}};
}

double tree_metric(const DecisionTree& tree, const Dataset& data, RewardMetric metric) {
  const auto s = scores(confusion(tree.classify(data), data.labels));
  return metric == RewardMetric::F1 ? s.f1 : s.auc;
}

namespace {

double linear(double from, double to, double progress) {
  return from + (to - from) * std::clamp(progress, 0.0, 1.0);
}

void require_both_classes(const Dataset& ds, const char* what) {
  if (ds.count(Label::Skip) == 0 || ds.count(Label::Build) == 0)
    throw Error(std::string(what) + " must contain both Skip and Build rows");
}

}  // namespace

TrainReport train(const Dataset& train_set, const TrainConfig& cfg, Agent* agent_out, std::mt19937_64* rng_out) {
  cfg.validate();
  train_set.validate();
  require_both_classes(train_set, "training set");

  const FeatureSchema& schema = train_set.schema;
  const std::size_t n_nodes = node_count_for_depth(cfg.depth);
  const std::size_t width = state_width(cfg.depth, schema.size(), cfg.conv_passes);
  const AgentConfig& ac = cfg.agent;

  std::mt19937_64 rng(cfg.seed);
  Agent agent(schema, width, ac, rng());
  PrioritizedBuffer buffer(ac.replay_capacity, ac.per_alpha, ac.priority_floor);

  const double total_steps = static_cast<double>(cfg.episodes * n_nodes);
  const double decay_steps = std::max(1.0, ac.epsilon_decay_fraction * total_steps);
  std::size_t step = 0;

  TrainReport report;
  DecisionTree tree = random_tree(schema, cfg.depth, rng);
  double previous = tree_metric(assign_leaf_labels(tree, train_set), train_set, cfg.reward_metric);
  report.initial_metric = previous;
  bool have_best = false;
  double best_metric = 0.0;

  std::vector<const Transition*> batch;
  for (std::size_t m = 0; m < cfg.episodes; ++m) {
    if (m > 0) tree = random_tree(schema, cfg.depth, rng);
    EpisodeRecord rec;
    std::size_t n_updates = 0;
    for (std::size_t t = 0; t < n_nodes; ++t) {
      const double eps = linear(ac.epsilon_start, ac.epsilon_end, step / decay_steps);
      rec.epsilon = eps;

      Transition tr;
      tr.state = encode_state(tree, schema, t, cfg.conv_passes);
      auto choice = agent.select_action(tr.state, eps, rng);
      tree.set_node(t, choice.action, schema);
      tr.action = choice.action;
      tr.parameters = std::move(choice.parameters);
      tr.next_state = encode_state(tree, schema, t + 1, cfg.conv_passes);
      tr.terminal = t + 1 == n_nodes;
      if (tr.terminal) {
        tree = assign_leaf_labels(tree, train_set);
        const auto s = scores(confusion(tree.classify(train_set), train_set.labels));
        const double metric = cfg.reward_metric == RewardMetric::F1 ? s.f1 : s.auc;
        tr.reward = metric - previous;
        previous = metric;
        rec.train_metric = metric;
        rec.reward = tr.reward;
        if (!have_best || metric > best_metric) {
          have_best = true;
          best_metric = metric;
          report.best_tree = tree;
        }
        report.best_train_f1 = std::max(report.best_train_f1, s.f1);
      }
      report.step_rewards.push_back(tr.reward);
      report.step_terminal.push_back(tr.terminal);
      buffer.push(std::move(tr));
      ++step;

      if (buffer.size() >= std::max(ac.warmup_steps, ac.batch_size)) {
        const double beta = linear(ac.per_beta_start, ac.per_beta_end, step / total_steps);
        const auto sample = buffer.sample(ac.batch_size, beta, rng);
        batch.clear();
        for (auto i : sample.indices) batch.push_back(&buffer.at(i));
        const auto result = agent.update(batch, sample.weights);
        buffer.update_priorities(sample.indices, result.td_errors);
        rec.loss_q += result.loss_q;
        rec.loss_x += result.loss_x;
        ++n_updates;
      }
    }
    if (n_updates > 0) {
      rec.loss_q /= static_cast<double>(n_updates);
      rec.loss_x /= static_cast<double>(n_updates);
    }
    report.history.push_back(rec);
  }
  report.transitions = step;
  if (cfg.reward_metric == RewardMetric::F1) report.best_train_f1 = best_metric;
  if (agent_out) *agent_out = std::move(agent);
  if (rng_out) *rng_out = rng;
  return report;
}

EvalScores evaluate(const DecisionTree& tree, const Dataset& test) {
  require_both_classes(test, "test set");
  return scores(confusion(tree.classify(test), test.labels));
}

ProtocolResult within_project(const Dataset& ds, const TrainConfig& cfg, double test_fraction) {
  auto [train_set, test_set] = stratified_split(ds, test_fraction, cfg.seed);
  ProtocolResult out;
  out.project = ds.provenance;
  out.report = train(train_set, cfg);
  out.tree = out.report.best_tree;
  out.scores = evaluate(out.tree, test_set);
  return out;
}

Dataset cross_project_training_set(const std::vector<Dataset>& projects, std::size_t held_out) {
  std::vector<Dataset> others;
  for (std::size_t j = 0; j < projects.size(); ++j)
    if (j != held_out) others.push_back(projects[j]);
  return concat(others, "all-but-" + projects.at(held_out).provenance);
}

std::vector<ProtocolResult> cross_project(const std::vector<Dataset>& projects, const TrainConfig& cfg) {
  if (projects.size() < 2) throw Error("cross-project validation needs at least two projects");
  const auto names = projects.front().schema.names();
  for (const auto& p : projects)
    if (p.schema.names() != names) throw Error("schema mismatch for project '" + p.provenance + "'");

  std::vector<std::future<ProtocolResult>> folds;
  for (std::size_t i = 0; i < projects.size(); ++i) {
    folds.push_back(std::async(std::launch::async, [&projects, cfg, i] {
      TrainConfig fold_cfg = cfg;
      fold_cfg.seed = cfg.seed + 1000003ULL * (i + 1);
      const Dataset train_set = cross_project_training_set(projects, i);
      ProtocolResult r;
      r.project = projects[i].provenance;
      r.report = train(train_set, fold_cfg);
      r.tree = r.report.best_tree;
      r.scores = evaluate(r.tree, projects[i]);
      return r;
    }));
  }
  std::vector<ProtocolResult> out;
  for (auto& f : folds) out.push_back(f.get());
  return out;
}

int sweep_depth(const Dataset& train_set, const TrainConfig& cfg, const std::vector<int>& depths) {
  if (depths.empty()) throw Error("empty depth sweep");
  auto [inner_train, validation] = stratified_split(train_set, 0.2, cfg.seed + 17);
  int best_depth = depths.front();
  double best_f1 = -1.0;
  for (int d : depths) {
    TrainConfig c = cfg;
    c.depth = d;
    const auto report = train(inner_train, c);
    const double f1 = evaluate(report.best_tree, validation).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_depth = d;
    }
  }
  return best_depth;
}

std::string checkpoint_to_json(const Agent& agent, const TrainConfig& cfg, const std::mt19937_64& rng) {
  std::ostringstream rng_state;
  rng_state << rng;
  nlohmann::json doc = {{"train_config", to_json(cfg)},
                        {"step_counter", agent.update_count()},
                        {"rng_state", rng_state.str()},
                        {"agent", agent.to_json()}};
  return doc.dump() + "\n";
}

}  // namespace ciskip
