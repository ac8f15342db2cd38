#include "ciskip/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace ciskip {

namespace {

constexpr int kMaxTries = 4000;
constexpr double kGoodEnough = 0.005;
constexpr double kTolerance = 0.02;

struct LeafPick {
  std::vector<bool> skip;
  double fraction = -1.0;
};

// Subset of non-empty leaves whose row count is closest to target.
LeafPick best_subset(const std::vector<std::size_t>& counts, double n, double target) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) cand.push_back(i);
  LeafPick best;
  if (cand.size() < 2) return best;
  double best_err = INFINITY;
  const std::size_t limit = std::size_t{1} << cand.size();
  for (std::size_t mask = 1; mask + 1 < limit; ++mask) {
    std::size_t total = 0;
    for (std::size_t b = 0; b < cand.size(); ++b)
      if (mask >> b & 1U) total += counts[cand[b]];
    const double err = std::abs(total / n - target);
    if (err < best_err) {
      best_err = err;
      best.fraction = total / n;
      best.skip.assign(counts.size(), false);
      for (std::size_t b = 0; b < cand.size(); ++b)
        if (mask >> b & 1U) best.skip[cand[b]] = true;
    }
  }
  return best;
}

}  // namespace

SynthResult gen_synth(const SynthConfig& cfg) {
  if (!(cfg.skip_fraction > 0.0 && cfg.skip_fraction < 1.0)) throw Error("skip fraction must lie in (0,1)");
  if (!(cfg.noise >= 0.0 && cfg.noise < 1.0)) throw Error("noise must lie in [0,1)");
  if (cfg.planted_depth < 1 || cfg.planted_depth > 4) throw Error("planted depth must lie in [1,4]");
  if (cfg.rows < 2 || cfg.features == 0) throw Error("need at least 2 rows and 1 feature");
  if (cfg.informative > cfg.features) throw Error("more informative features than features");

  std::vector<FeatureSpec> specs;
  for (std::size_t k = 0; k < cfg.features; ++k) {
    char name[16];
    std::snprintf(name, sizeof(name), "f%02zu", k);
    specs.push_back({name, FeatureKind::Numeric, 0.0, 1.0});
  }
  if (cfg.workflow) {
    specs.push_back({"PBS", FeatureKind::Boolean, 0.0, 1.0});
    specs.push_back({"Fail_rate", FeatureKind::Numeric, 0.0, 1.0});
    specs.push_back({"avg_exp", FeatureKind::Numeric, 0.0, 1.0});
  }
  const FeatureSchema schema(std::move(specs));
  const std::size_t width = schema.size();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthResult out;
  out.data.schema = schema;
  out.data.provenance = "synth-" + std::to_string(cfg.seed);
  out.data.rows.assign(cfg.rows, FeatureVector(width));
  for (auto& row : out.data.rows) {
    for (std::size_t k = 0; k < cfg.features; ++k) row[k] = unit(rng);
    if (cfg.workflow) {
      row[cfg.features] = unit(rng) < 0.5 ? 0.0 : 1.0;
      row[cfg.features + 1] = unit(rng);
      row[cfg.features + 2] = unit(rng);
    }
  }

  const std::size_t pool = cfg.informative == 0 ? cfg.features : cfg.informative;
  std::uniform_int_distribution<std::size_t> pick_attr(0, pool - 1);
  std::uniform_int_distribution<std::size_t> pick_root(cfg.features, cfg.features + 1);
  const std::size_t n_nodes = node_count_for_depth(cfg.planted_depth);
  const double n = static_cast<double>(cfg.rows);

  DecisionTree best_tree;
  LeafPick best;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    std::vector<TreeNode> nodes(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      nodes[i].attribute = (cfg.workflow && i == 0) ? pick_root(rng) : pick_attr(rng);
      nodes[i].threshold = 0.05 + 0.9 * unit(rng);
    }
    DecisionTree tree(cfg.planted_depth, std::move(nodes), std::vector<Label>(n_nodes + 1, Label::Build));
    std::vector<std::size_t> counts(tree.leaf_count(), 0);
    for (const auto& row : out.data.rows) ++counts[tree.leaf_index(row)];
    auto pickd = best_subset(counts, n, cfg.skip_fraction);
    if (pickd.fraction < 0.0) continue;
    if (best.fraction < 0.0 ||
        std::abs(pickd.fraction - cfg.skip_fraction) < std::abs(best.fraction - cfg.skip_fraction)) {
      best = std::move(pickd);
      best_tree = std::move(tree);
    }
    if (std::abs(best.fraction - cfg.skip_fraction) <= kGoodEnough) break;
  }
  if (best.fraction < 0.0 || std::abs(best.fraction - cfg.skip_fraction) > kTolerance)
    throw Error("cannot plant a depth-" + std::to_string(cfg.planted_depth) + " tree covering a Skip fraction of " +
                std::to_string(cfg.skip_fraction));

  std::vector<Label> leaves(best.skip.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) leaves[i] = best.skip[i] ? Label::Skip : Label::Build;
  best_tree.set_leaf_labels(std::move(leaves));
  out.planted = {schema, best_tree};

  out.clean_labels = best_tree.classify(out.data);
  out.data.labels = out.clean_labels;
  for (auto& l : out.data.labels)
    if (unit(rng) < cfg.noise) l = l == Label::Skip ? Label::Build : Label::Skip;
  return out;
}

}  // namespace ciskip
