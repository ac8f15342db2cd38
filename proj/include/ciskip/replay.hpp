#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "ciskip/tree.hpp"

namespace ciskip {

struct Transition {
  TreeState state;
  Action action;
  /// Range-normalised threshold proposals fed to the attributes-network when
  /// the action was chosen, with the executed threshold at action.attribute.
  std::vector<double> parameters;
  double reward = 0.0;
  TreeState next_state;
  bool terminal = false;
};

struct ReplaySample {
  std::vector<std::size_t> indices;
  std::vector<double> weights;
};

/// Proportional prioritized replay over a fixed-capacity ring.
class PrioritizedBuffer {
 public:
  PrioritizedBuffer(std::size_t capacity, double alpha, double priority_floor);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  double alpha() const { return alpha_; }

  /// Stored with the current maximum live priority (1 when empty); evicts the
  /// oldest item once full.
  void push(Transition tr);

  /// Draws with replacement with probability p_i^alpha / sum p^alpha. Weights
  /// are (size * P(i))^-beta divided by the batch maximum.
  ReplaySample sample(std::size_t batch_size, double beta, std::mt19937_64& rng) const;

  /// p_i = |td_error_i| + floor.
  void update_priorities(const std::vector<std::size_t>& indices, const std::vector<double>& td_errors);

  const Transition& at(std::size_t i) const { return items_.at(i); }
  double priority(std::size_t i) const { return priorities_.at(i); }
  /// Sampling probability of slot i.
  double probability(std::size_t i) const;
  double total_priority() const;

 private:
  std::size_t capacity_;
  double alpha_;
  double floor_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
  std::vector<double> priorities_;
};

}  // namespace ciskip
