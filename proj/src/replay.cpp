#include "ciskip/replay.hpp"

#include <algorithm>
#include <cmath>

namespace ciskip {

PrioritizedBuffer::PrioritizedBuffer(std::size_t capacity, double alpha, double priority_floor)
    : capacity_(capacity), alpha_(alpha), floor_(priority_floor) {
  if (capacity == 0) throw Error("replay capacity must be positive");
  if (!(priority_floor > 0.0)) throw Error("priority floor must be positive");
  if (alpha < 0.0) throw Error("alpha must be non-negative");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void PrioritizedBuffer::push(Transition tr) {
  const double p = priorities_.empty() ? 1.0 : *std::max_element(priorities_.begin(), priorities_.end());
  if (items_.size() < capacity_) {
    items_.push_back(std::move(tr));
    priorities_.push_back(p);
  } else {
    items_[next_] = std::move(tr);
    priorities_[next_] = p;
  }
  next_ = (next_ + 1) % capacity_;
}

double PrioritizedBuffer::total_priority() const {
  double s = 0.0;
  for (double p : priorities_) s += p;
  return s;
}

double PrioritizedBuffer::probability(std::size_t i) const {
  double total = 0.0;
  for (double p : priorities_) total += std::pow(p, alpha_);
  return std::pow(priorities_.at(i), alpha_) / total;
}

ReplaySample PrioritizedBuffer::sample(std::size_t batch_size, double beta, std::mt19937_64& rng) const {
  if (batch_size == 0 || items_.size() < batch_size)
    throw Error("replay buffer holds " + std::to_string(items_.size()) + " transitions, batch needs " +
                std::to_string(batch_size));
  std::vector<double> cumulative(priorities_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < priorities_.size(); ++i) {
    total += std::pow(priorities_[i], alpha_);
    cumulative[i] = total;
  }
  std::uniform_real_distribution<double> unit(0.0, total);
  ReplaySample out;
  out.indices.reserve(batch_size);
  out.weights.reserve(batch_size);
  const double n = static_cast<double>(items_.size());
  double max_w = 0.0;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const double u = unit(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
    const double prob = std::pow(priorities_[i], alpha_) / total;
    const double w = std::pow(n * prob, -beta);
    out.indices.push_back(i);
    out.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (double& w : out.weights) w /= max_w;
  return out;
}

void PrioritizedBuffer::update_priorities(const std::vector<std::size_t>& indices,
                                          const std::vector<double>& td_errors) {
  if (indices.size() != td_errors.size()) throw Error("priority update: size mismatch");
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= items_.size()) throw Error("priority update: index out of range");
    priorities_[indices[j]] = std::abs(td_errors[j]) + floor_;
  }
}

}  // namespace ciskip
