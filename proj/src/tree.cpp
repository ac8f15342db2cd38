#include "ciskip/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ciskip {

namespace {

struct Bucket {
  std::size_t skip = 0;
  std::size_t build = 0;

  std::size_t total() const { return skip + build; }
  void add(Label l) { (l == Label::Skip ? skip : build)++; }
  Label majority() const { return skip >= build ? Label::Skip : Label::Build; }
};

double gini_of(const Bucket& b) { return gini(b.skip, b.build); }

// Bucket per BFS position over internal nodes followed by leaves.
std::vector<Bucket> route_counts(const DecisionTree& tree, const Dataset& ds) {
  const std::size_t n = tree.node_count();
  std::vector<Bucket> buckets(n + tree.leaf_count());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t pos = 0;
    buckets[pos].add(ds.labels[i]);
    while (pos < n) {
      const auto& node = tree.node(pos);
      pos = ds.rows[i][node.attribute] <= node.threshold ? 2 * pos + 1 : 2 * pos + 2;
      buckets[pos].add(ds.labels[i]);
    }
  }
  return buckets;
}

}  // namespace

std::size_t node_count_for_depth(int depth) {
  if (depth < 1 || depth > 30) throw Error("tree depth must lie in [1,30]");
  return (std::size_t{1} << depth) - 1;
}

DecisionTree::DecisionTree(int depth, std::vector<TreeNode> nodes, std::vector<Label> leaf_labels)
    : depth_(depth), nodes_(std::move(nodes)), leaf_labels_(std::move(leaf_labels)) {
  const std::size_t n = node_count_for_depth(depth);
  if (nodes_.size() != n) throw Error("a depth-" + std::to_string(depth) + " tree needs " +
                                      std::to_string(n) + " nodes");
  if (leaf_labels_.size() != n + 1) throw Error("leaf label count must be node count + 1");
  for (const auto& node : nodes_)
    if (!std::isfinite(node.threshold)) throw Error("non-finite threshold");
}

std::size_t DecisionTree::leaf_index(const FeatureVector& x) const {
  std::size_t pos = 0;
  const std::size_t n = nodes_.size();
  while (pos < n) {
    const auto& node = nodes_[pos];
    pos = x[node.attribute] <= node.threshold ? 2 * pos + 1 : 2 * pos + 2;
  }
  return pos - n;
}

std::vector<std::size_t> DecisionTree::path(const FeatureVector& x) const {
  std::vector<std::size_t> visited;
  std::size_t pos = 0;
  while (pos < nodes_.size()) {
    visited.push_back(pos);
    const auto& node = nodes_[pos];
    pos = x[node.attribute] <= node.threshold ? 2 * pos + 1 : 2 * pos + 2;
  }
  return visited;
}

Label DecisionTree::classify(const FeatureVector& x) const { return leaf_labels_[leaf_index(x)]; }

std::vector<Label> DecisionTree::classify(const Dataset& ds) const {
  std::vector<Label> out;
  out.reserve(ds.size());
  for (const auto& row : ds.rows) out.push_back(classify(row));
  return out;
}

void DecisionTree::set_node(std::size_t t, const Action& action, const FeatureSchema& schema) {
  if (t >= nodes_.size())
    throw Error("node index " + std::to_string(t) + " out of range [0," +
                std::to_string(nodes_.size()) + ")");
  if (action.attribute >= schema.size()) throw Error("attribute index out of range");
  if (!std::isfinite(action.threshold)) throw Error("non-finite threshold");
  nodes_[t] = {action.attribute, schema[action.attribute].clamp(action.threshold)};
}

void DecisionTree::set_leaf_labels(std::vector<Label> labels) {
  if (labels.size() != leaf_labels_.size()) throw Error("leaf label count mismatch");
  leaf_labels_ = std::move(labels);
}

DecisionTree random_tree(const FeatureSchema& schema, int depth, std::mt19937_64& rng) {
  const std::size_t n = node_count_for_depth(depth);
  std::uniform_int_distribution<std::size_t> pick(0, schema.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TreeNode> nodes(n);
  for (auto& node : nodes) {
    node.attribute = pick(rng);
    node.threshold = schema[node.attribute].denormalize(unit(rng));
  }
  return DecisionTree(depth, std::move(nodes), std::vector<Label>(n + 1, Label::Build));
}

DecisionTree with_node(const DecisionTree& tree, std::size_t t, const Action& action,
                       const FeatureSchema& schema) {
  DecisionTree out = tree;
  out.set_node(t, action, schema);
  return out;
}

DecisionTree assign_leaf_labels(const DecisionTree& tree, const Dataset& train) {
  if (train.empty()) throw Error("assign_leaf_labels: empty training set");
  const auto buckets = route_counts(tree, train);
  const std::size_t n = tree.node_count();
  std::vector<Label> labels(tree.leaf_count());
  for (std::size_t leaf = 0; leaf < labels.size(); ++leaf) {
    std::size_t pos = n + leaf;
    while (buckets[pos].total() == 0 && pos > 0) pos = (pos - 1) / 2;
    labels[leaf] = buckets[pos].majority();
  }
  DecisionTree out = tree;
  out.set_leaf_labels(std::move(labels));
  return out;
}

std::size_t state_width(int depth, std::size_t feature_count, int conv_passes) {
  const int passes = std::clamp(conv_passes, 0, depth - 1);
  return node_count_for_depth(depth - passes) * feature_count + 1;
}

TreeState encode_state(const DecisionTree& tree, const FeatureSchema& schema, std::size_t next_t,
                       int conv_passes) {
  const std::size_t k = schema.size();
  const std::size_t n = tree.node_count();
  if (next_t > n) throw Error("encode_state: node index out of range");

  std::vector<double> layer(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = tree.node(i);
    layer[i * k + node.attribute] = schema[node.attribute].normalize(node.threshold);
  }

  const int passes = std::clamp(conv_passes, 0, tree.depth() - 1);
  std::size_t live = n;
  for (int p = 0; p < passes; ++p) {
    const std::size_t parents = live / 2;  // 2^(d-1) - 1 of 2^d - 1
    std::vector<double> next(parents * k);
    for (std::size_t i = 0; i < parents; ++i)
      for (std::size_t j = 0; j < k; ++j)
        next[i * k + j] =
            (layer[i * k + j] + layer[(2 * i + 1) * k + j] + layer[(2 * i + 2) * k + j]) / 3.0;
    layer = std::move(next);
    live = parents;
  }

  layer.push_back(static_cast<double>(next_t) / static_cast<double>(n));
  return layer;
}

double gini(std::size_t skip, std::size_t build) {
  const double total = static_cast<double>(skip + build);
  if (total == 0.0) return 0.0;
  const double ps = skip / total, pb = build / total;
  return 1.0 - ps * ps - pb * pb;
}

namespace {

struct Split {
  std::size_t attribute = 0;
  double threshold = 0.0;
  double weighted_gini = std::numeric_limits<double>::infinity();
};

// Best (attribute, midpoint) split for the rows in `idx`.
Split best_split(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Split best;
  const double n = static_cast<double>(idx.size());
  std::size_t total_skip = 0;
  for (auto i : idx) total_skip += ds.labels[i] == Label::Skip;

  std::vector<std::pair<double, Label>> col(idx.size());
  for (std::size_t a = 0; a < ds.schema.size(); ++a) {
    for (std::size_t r = 0; r < idx.size(); ++r) col[r] = {ds.rows[idx[r]][a], ds.labels[idx[r]]};
    std::sort(col.begin(), col.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    std::size_t left_skip = 0;
    for (std::size_t r = 0; r + 1 < col.size(); ++r) {
      left_skip += col[r].second == Label::Skip;
      if (col[r].first == col[r + 1].first) continue;
      const std::size_t nl = r + 1, nr = col.size() - nl;
      const std::size_t right_skip = total_skip - left_skip;
      const double w = (nl * gini(left_skip, nl - left_skip) + nr * gini(right_skip, nr - right_skip)) / n;
      if (w < best.weighted_gini) {
        best.attribute = a;
        best.threshold = 0.5 * (col[r].first + col[r + 1].first);
        best.weighted_gini = w;
      }
    }
  }
  return best;
}

void fill_leaves(std::vector<Label>& leaves, std::size_t n, std::size_t pos, Label label) {
  if (pos >= n) {
    leaves[pos - n] = label;
    return;
  }
  fill_leaves(leaves, n, 2 * pos + 1, label);
  fill_leaves(leaves, n, 2 * pos + 2, label);
}

// Copies `split` into every internal descendant of pos (inclusive).
void pad_nodes(std::vector<TreeNode>& nodes, std::size_t pos, const TreeNode& split) {
  if (pos >= nodes.size()) return;
  nodes[pos] = split;
  pad_nodes(nodes, 2 * pos + 1, split);
  pad_nodes(nodes, 2 * pos + 2, split);
}

}  // namespace

DecisionTree greedy_gini_build(const Dataset& train, int max_depth, std::size_t min_samples_split) {
  if (train.empty()) throw Error("greedy_gini_build: empty training set");
  const std::size_t n = node_count_for_depth(max_depth);
  std::vector<TreeNode> nodes(n);
  std::vector<Label> leaves(n + 1, Label::Build);

  // Inert split used when the root itself stops: everything goes left.
  const TreeNode inert{0, train.schema[0].max};

  struct Work {
    std::size_t pos;
    std::vector<std::size_t> idx;
    TreeNode parent_split;
    Label parent_majority;
  };
  std::vector<std::size_t> all(train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Bucket root_bucket;
  for (auto l : train.labels) root_bucket.add(l);

  std::vector<Work> stack;
  stack.push_back({0, std::move(all), inert, root_bucket.majority()});
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    Bucket b;
    for (auto i : w.idx) b.add(train.labels[i]);
    const Label majority = b.total() == 0 ? w.parent_majority : b.majority();

    if (w.pos >= n) {
      leaves[w.pos - n] = majority;
      continue;
    }
    const bool pure = b.skip == 0 || b.build == 0;
    Split split;
    if (!pure && w.idx.size() >= min_samples_split) split = best_split(train, w.idx);
    if (!std::isfinite(split.weighted_gini)) {
      pad_nodes(nodes, w.pos, w.parent_split);
      fill_leaves(leaves, n, w.pos, majority);
      continue;
    }
    const TreeNode node{split.attribute, split.threshold};
    nodes[w.pos] = node;
    std::vector<std::size_t> left, right;
    for (auto i : w.idx) (train.rows[i][node.attribute] <= node.threshold ? left : right).push_back(i);
    stack.push_back({2 * w.pos + 2, std::move(right), node, majority});
    stack.push_back({2 * w.pos + 1, std::move(left), node, majority});
  }
  return DecisionTree(max_depth, std::move(nodes), std::move(leaves));
}

ImportanceDetail feature_importance(const DecisionTree& tree, const Dataset& data) {
  if (data.empty()) throw Error("feature_importance: empty dataset");
  const auto buckets = route_counts(tree, data);
  const double total = static_cast<double>(data.size());
  auto mass = [&](std::size_t pos) {
    return buckets[pos].total() / total * gini_of(buckets[pos]);
  };

  ImportanceDetail out;
  const std::size_t n = tree.node_count();
  out.node_gain.resize(n);
  out.shares.assign(data.schema.size(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    out.node_gain[j] = mass(j) - mass(2 * j + 1) - mass(2 * j + 2);
    out.shares[tree.node(j).attribute] += std::max(0.0, out.node_gain[j]);
  }
  out.root_mass = mass(0);
  for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) out.leaf_mass += mass(n + leaf);

  double sum = 0.0;
  for (double s : out.shares) sum += s;
  if (sum > 0.0)
    for (double& s : out.shares) s /= sum;
  return out;
}

}  // namespace ciskip
