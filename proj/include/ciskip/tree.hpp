#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "ciskip/dataset.hpp"

namespace ciskip {

/// One split test: go left when x[attribute] <= threshold.
struct TreeNode {
  std::size_t attribute = 0;
  double threshold = 0.0;

  bool operator==(const TreeNode&) const = default;
};

/// The composite agent action: a discrete attribute and its continuous
/// threshold.
struct Action {
  std::size_t attribute = 0;
  double threshold = 0.0;

  bool operator==(const Action&) const = default;
};

using TreeState = std::vector<double>;

/// Complete binary tree of fixed depth stored in breadth-first order. Node i
/// has children 2i+1 and 2i+2; positions >= node_count() address leaves.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(int depth, std::vector<TreeNode> nodes, std::vector<Label> leaf_labels);

  int depth() const { return depth_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const { return leaf_labels_.size(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t t) const { return nodes_.at(t); }
  const std::vector<Label>& leaf_labels() const { return leaf_labels_; }

  /// Index in [0, leaf_count()) of the leaf reached by x.
  std::size_t leaf_index(const FeatureVector& x) const;
  /// BFS indices of the internal nodes visited by x, root first.
  std::vector<std::size_t> path(const FeatureVector& x) const;
  Label classify(const FeatureVector& x) const;
  std::vector<Label> classify(const Dataset& ds) const;

  /// Replaces node t; the threshold is clamped into the attribute's range.
  void set_node(std::size_t t, const Action& action, const FeatureSchema& schema);
  void set_leaf_labels(std::vector<Label> labels);

  bool operator==(const DecisionTree&) const = default;

 private:
  int depth_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<Label> leaf_labels_;
};

std::size_t node_count_for_depth(int depth);

/// Uniform attributes, thresholds uniform within each attribute's range,
/// every leaf Build.
DecisionTree random_tree(const FeatureSchema& schema, int depth, std::mt19937_64& rng);

/// Copy of `tree` with node t replaced (see DecisionTree::set_node).
DecisionTree with_node(const DecisionTree& tree, std::size_t t, const Action& action,
                       const FeatureSchema& schema);

/// Leaf label = majority of the training rows routed to it; an empty leaf
/// takes the majority of its nearest non-empty ancestor; ties go to Skip.
DecisionTree assign_leaf_labels(const DecisionTree& tree, const Dataset& train);

std::size_t state_width(int depth, std::size_t feature_count, int conv_passes = 1);

/// Node vectors are one-hot at the node's attribute, holding the
/// range-normalised threshold. Each convolution pass replaces every
/// non-bottom node by the mean of itself and its two children and drops the
/// bottom layer. The surviving vectors are flattened in BFS order and
/// next_t / node_count is appended.
TreeState encode_state(const DecisionTree& tree, const FeatureSchema& schema, std::size_t next_t,
                       int conv_passes = 1);

/// Gini impurity of a two-class bucket.
double gini(std::size_t skip, std::size_t build);

/// CART-style greedy construction minimising weighted child Gini. Nodes that
/// stop early are padded so the result is a complete tree of `max_depth`.
DecisionTree greedy_gini_build(const Dataset& train, int max_depth, std::size_t min_samples_split = 2);

struct ImportanceDetail {
  /// Impurity decrease U for every internal node, before flooring.
  std::vector<double> node_gain;
  /// Weighted impurity of the root bucket.
  double root_mass = 0.0;
  /// Sum of weighted impurities over the leaf buckets.
  double leaf_mass = 0.0;
  /// Normalised per-feature share; all zero when no node decreases impurity.
  std::vector<double> shares;
};

/// Mean-decrease-in-impurity importance with node-reach-probability weights.
ImportanceDetail feature_importance(const DecisionTree& tree, const Dataset& data);

}  // namespace ciskip
