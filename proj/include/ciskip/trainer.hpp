#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ciskip/agent.hpp"
#include "ciskip/dataset.hpp"
#include "ciskip/metrics.hpp"
#include "ciskip/tree.hpp"
#include "json.hpp"

namespace ciskip {

enum class RewardMetric { F1, Auc };

struct TrainConfig {
  int depth = 4;
  std::size_t episodes = 400;
  AgentConfig agent;
  RewardMetric reward_metric = RewardMetric::F1;
  /// Score the best tree of each episode on the training set in the history
  /// (always true for the reward itself; kept for config compatibility).
  bool eval_each_episode = true;
  int conv_passes = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig defaults = {});

struct EpisodeRecord {
  double train_metric = 0.0;
  double reward = 0.0;
  double epsilon = 0.0;
  double loss_q = 0.0;
  double loss_x = 0.0;
};

struct TrainReport {
  DecisionTree best_tree;
  double best_train_f1 = 0.0;
  /// Metric of the initial random tree of the first episode (s_0).
  double initial_metric = 0.0;
  std::vector<EpisodeRecord> history;
  /// Every transition reward in emission order, terminal flags alongside.
  std::vector<double> step_rewards;
  std::vector<bool> step_terminal;
  std::size_t transitions = 0;
};

nlohmann::json history_to_json(const TrainReport& report);

/// Metric used for the reward on a labelled set.
double tree_metric(const DecisionTree& tree, const Dataset& data, RewardMetric metric);

/// Runs cfg.episodes tree-building episodes and returns the best tree by the
/// training metric. `agent_out`, when given, receives the final agent and the
/// exploration RNG for checkpointing.
TrainReport train(const Dataset& train_set, const TrainConfig& cfg, Agent* agent_out = nullptr,
                  std::mt19937_64* rng_out = nullptr);

EvalScores evaluate(const DecisionTree& tree, const Dataset& test);

struct ProtocolResult {
  std::string project;
  EvalScores scores;
  DecisionTree tree;
  TrainReport report;
};

/// Seeded stratified 80/20 split, train on 80, score on 20.
ProtocolResult within_project(const Dataset& ds, const TrainConfig& cfg, double test_fraction = 0.2);

/// Leave-one-project-out. Folds run concurrently; each fold is seeded from
/// cfg.seed and its position so results do not depend on scheduling.
std::vector<ProtocolResult> cross_project(const std::vector<Dataset>& projects, const TrainConfig& cfg);

/// Training set of fold `held_out`: every other project concatenated.
Dataset cross_project_training_set(const std::vector<Dataset>& projects, std::size_t held_out);

/// Picks the depth with the best F1 on an inner stratified validation split
/// of `train_set`.
int sweep_depth(const Dataset& train_set, const TrainConfig& cfg, const std::vector<int>& depths);

/// Checkpoint JSON: agent networks, config, step counter and RNG state.
std::string checkpoint_to_json(const Agent& agent, const TrainConfig& cfg, const std::mt19937_64& rng);

}  // namespace ciskip
