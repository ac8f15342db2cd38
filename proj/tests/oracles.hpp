#pragma once

// Independent reference implementations used to cross-check the library.

#include <cmath>
#include <functional>
#include <vector>

#include "ciskip/metrics.hpp"
#include "ciskip/neural.hpp"
#include "ciskip/tree.hpp"

namespace oracle {

/// Scores from a confusion matrix by enumerating an explicit label list.
inline ciskip::EvalScores brute_scores(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  using ciskip::Label;
  std::vector<std::pair<Label, Label>> rows;  // (predicted, actual)
  for (std::size_t i = 0; i < tp; ++i) rows.push_back({Label::Skip, Label::Skip});
  for (std::size_t i = 0; i < fp; ++i) rows.push_back({Label::Skip, Label::Build});
  for (std::size_t i = 0; i < fn; ++i) rows.push_back({Label::Build, Label::Skip});
  for (std::size_t i = 0; i < tn; ++i) rows.push_back({Label::Build, Label::Build});
  double hit = 0, pred_pos = 0, pos = 0, neg = 0, false_pos = 0;
  for (auto [p, a] : rows) {
    pred_pos += p == Label::Skip;
    pos += a == Label::Skip;
    neg += a == Label::Build;
    hit += p == Label::Skip && a == Label::Skip;
    false_pos += p == Label::Skip && a == Label::Build;
  }
  ciskip::EvalScores s;
  s.precision = pred_pos > 0 ? hit / pred_pos : 0.0;
  s.recall = hit / pos;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.auc = 0.5 * (1.0 + s.recall - false_pos / neg);
  return s;
}

/// Classifies x by finding the unique leaf whose root-to-leaf conjunction of
/// split tests holds, enumerating every leaf independently.
inline ciskip::Label rule_classify(const ciskip::DecisionTree& tree, const ciskip::FeatureVector& x) {
  const std::size_t n = tree.node_count();
  int matches = 0;
  ciskip::Label out = ciskip::Label::Build;
  for (std::size_t leaf = 0; leaf <= n; ++leaf) {
    bool holds = true;
    std::size_t pos = n + leaf;
    while (pos > 0) {
      const std::size_t parent = (pos - 1) / 2;
      const bool left = pos == 2 * parent + 1;
      const auto& node = tree.node(parent);
      const bool test = x[node.attribute] <= node.threshold;
      if (test != left) holds = false;
      pos = parent;
    }
    if (holds) {
      ++matches;
      out = tree.leaf_labels()[leaf];
    }
  }
  if (matches != 1) throw std::logic_error("rule set is not a partition");
  return out;
}

/// Max relative error between reverse-mode and central finite-difference
/// gradients of L = <forward(x), g>, over all parameters and inputs.
inline double gradient_check(ciskip::neural::Network net, std::vector<double> x, const std::vector<double>& g,
                             double h = 1e-6) {
  using namespace ciskip::neural;
  auto loss = [&](const Network& n, const std::vector<double>& in) {
    const auto y = forward(n, in);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * g[i];
    return s;
  };
  Cache cache;
  forward(net, x, &cache);
  const Gradients grads = backward(net, cache, g);
  double worst = 0;
  auto compare = [&](double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i) {
      const double keep = net.layers[l].weights[i];
      net.layers[l].weights[i] = keep + h;
      const double up = loss(net, x);
      net.layers[l].weights[i] = keep - h;
      const double down = loss(net, x);
      net.layers[l].weights[i] = keep;
      compare(grads.layers[l].weights[i], (up - down) / (2 * h));
    }
    for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) {
      const double keep = net.layers[l].bias[i];
      net.layers[l].bias[i] = keep + h;
      const double up = loss(net, x);
      net.layers[l].bias[i] = keep - h;
      const double down = loss(net, x);
      net.layers[l].bias[i] = keep;
      compare(grads.layers[l].bias[i], (up - down) / (2 * h));
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss(net, x);
    x[i] = keep - h;
    const double down = loss(net, x);
    x[i] = keep;
    compare(grads.input[i], (up - down) / (2 * h));
  }
  return worst;
}

}  // namespace oracle
