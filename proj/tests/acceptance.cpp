// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "ciskip/agent.hpp"
#include "ciskip/metrics.hpp"
#include "ciskip/neural.hpp"
#include "ciskip/replay.hpp"
#include "ciskip/synth.hpp"
#include "ciskip/trainer.hpp"
#include "ciskip/tree.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ciskip;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Worst |sum of rewards - (s_M - s_0)| and whether any non-terminal reward is nonzero.
struct TelescopeAudit {
  double worst = 0.0;
  bool nonterminal_zero = true;
  int runs = 0;

  void add(const TrainReport& r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.step_rewards.size(); ++i) {
      sum += r.step_rewards[i];
      if (!r.step_terminal[i] && r.step_rewards[i] != 0.0) nonterminal_zero = false;
    }
    const double final_metric = r.history.empty() ? r.initial_metric : r.history.back().train_metric;
    worst = std::max(worst, std::abs(sum - (final_metric - r.initial_metric)));
    ++runs;
  }
};

TelescopeAudit telescope;

TrainConfig benchmark_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.depth = 3;
  cfg.episodes = 400;
  cfg.seed = seed;
  return cfg;
}

void metric_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = scores({3, 1, 1, 5});
  bool ok = std::abs(s.precision - 0.75) < 1e-9 && std::abs(s.recall - 0.75) < 1e-9 &&
            std::abs(s.f1 - 0.75) < 1e-9 && std::abs(s.auc - 0.7916666666666666) < 1e-9;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> cell(0, 40);
  int checked = 0;
  while (checked < 50) {
    const ConfusionMatrix cm{cell(rng), cell(rng), cell(rng), cell(rng)};
    if (cm.tp + cm.fn == 0 || cm.fp + cm.tn == 0) continue;
    const auto a = scores(cm);
    const auto b = oracle::brute_scores(cm.tp, cm.fp, cm.fn, cm.tn);
    ok = ok && std::abs(a.precision - b.precision) < 1e-12 && std::abs(a.recall - b.recall) < 1e-12 &&
         std::abs(a.f1 - b.f1) < 1e-12 && std::abs(a.auc - b.auc) < 1e-12;
    ++checked;
  }
  const double secs = seconds_since(t0);
  report("metric oracle", ok && secs < 1.0,
         "reference (" + fmt("%.5f", s.precision) + ", " + fmt("%.5f", s.recall) + ", " + fmt("%.5f", s.f1) + ", " +
             fmt("%.5f", s.auc) + "), 50 random matrices, " + fmt("%.3f", secs) + " s");
}

void gradient_fidelity() {
  using namespace ciskip::neural;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::vector<std::size_t>> shapes = {{10, 16, 8}, {10, 8}, {4, 6, 3}, {7, 16, 16, 2}, {3, 5, 1}};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& shape : shapes)
      for (auto out : {Activation::Identity, Activation::Logistic}) {
        const auto net = init_network(shape, Activation::Relu, out, rng());
        std::vector<double> x(shape.front()), g(shape.back());
        for (auto& v : x) v = u(rng);
        for (auto& v : g) v = u(rng);
        worst = std::max(worst, oracle::gradient_check(net, x, g));
      }
  }
  const double secs = seconds_since(t0);
  report("gradient fidelity", worst < 1e-4 && secs < 30.0,
         "max relative error " + fmt("%.2e", worst) + " over 5 seeds, " + fmt("%.2f", secs) + " s");
}

void tree_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t trees = 0, mismatches = 0;
  for (int d = 1; d <= 3; ++d)
    for (std::size_t k = 1; k <= 3; ++k) {
      std::vector<FeatureSpec> specs;
      for (std::size_t j = 0; j < k; ++j) specs.push_back({"x" + std::to_string(j), FeatureKind::Numeric, 0, 1});
      const std::size_t n = node_count_for_depth(d);
      std::size_t assignments = 1;
      for (std::size_t i = 0; i < n; ++i) assignments *= k;
      // Every attribute assignment; thresholds and leaf labels drawn from the grid.
      for (std::size_t a = 0; a < assignments; ++a) {
        std::vector<TreeNode> nodes(n);
        std::size_t code = a;
        for (auto& node : nodes) {
          node.attribute = code % k;
          code /= k;
          node.threshold = grid[rng() % 5];
        }
        std::vector<Label> leaves(n + 1);
        for (auto& l : leaves) l = rng() % 2 ? Label::Skip : Label::Build;
        const DecisionTree t(d, nodes, leaves);
        ++trees;
        std::vector<std::size_t> digits(k, 0);
        FeatureVector x(k);
        while (true) {
          for (std::size_t j = 0; j < k; ++j) x[j] = grid[digits[j]];
          mismatches += t.classify(x) != oracle::rule_classify(t, x);
          std::size_t j = 0;
          while (j < k && ++digits[j] == 5) digits[j++] = 0;
          if (j == k) break;
        }
      }
    }
  const double secs = seconds_since(t0);
  report("tree equivalence", mismatches == 0 && secs < 10.0,
         std::to_string(trees) + " trees on the 5-point grid, " + std::to_string(mismatches) + " mismatches, " +
             fmt("%.2f", secs) + " s");
}

void state_encoding() {
  std::mt19937_64 rng(11);
  bool ok = true;
  std::string detail;
  for (std::size_t k : {3, 26, 29}) {
    std::vector<FeatureSpec> specs;
    for (std::size_t j = 0; j < k; ++j)
      specs.push_back({"f" + std::to_string(j), j % 3 ? FeatureKind::Numeric : FeatureKind::Boolean, 0.0,
                       j % 3 ? 10.0 + j : 1.0});
    const FeatureSchema schema(specs);
    for (int d = 1; d <= 6; ++d) {
      const std::size_t want = d == 1 ? k + 1 : ((std::size_t{1} << (d - 1)) - 1) * k + 1;
      for (int rep = 0; rep < 5; ++rep) {
        const auto tree = random_tree(schema, d, rng);
        for (std::size_t t = 0; t <= tree.node_count(); ++t) {
          const auto s = encode_state(tree, schema, t);
          ok = ok && s.size() == want && s.size() == state_width(d, k);
          for (double v : s) ok = ok && v >= 0.0 && v <= 1.0;
        }
      }
    }
  }
  report("state encoding", ok, "lengths (2^(d-1)-1)K+1 for d=2..6 and K+1 for d=1, K in {3,26,29}, entries in [0,1]");
}

void per_statistics() {
  PrioritizedBuffer buf(8, 1.0, 0.5);
  for (int i = 0; i < 3; ++i) buf.push(Transition{});
  buf.update_priorities({0, 1, 2}, {0.5, 0.5, 1.5});
  std::mt19937_64 rng(5);
  const int draws = 100000;
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < draws; ++i) counts[buf.sample(1, 0.4, rng).indices[0]] += 1;
  const double want[] = {0.25, 0.25, 0.5};
  double worst_z = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double sigma = std::sqrt(want[i] * (1 - want[i]) / draws);
    worst_z = std::max(worst_z, std::abs(counts[i] / draws - want[i]) / sigma);
  }

  PrioritizedBuffer flat(8, 0.0, 0.5);
  for (int i = 0; i < 3; ++i) flat.push(Transition{});
  flat.update_priorities({0, 1, 2}, {0.5, 0.5, 1.5});
  std::vector<double> uc(3, 0.0);
  for (int i = 0; i < draws; ++i) uc[flat.sample(1, 0.4, rng).indices[0]] += 1;
  double chi2 = 0.0;
  for (double c : uc) chi2 += (c - draws / 3.0) * (c - draws / 3.0) / (draws / 3.0);

  bool unit = true;
  for (int i = 0; i < 1000; ++i)
    for (double w : buf.sample(3, 0.0, rng).weights) unit = unit && w == 1.0;

  report("PER statistics", worst_z < 3.0 && chi2 < 13.82 && unit,
         "alpha=1 max |z| " + fmt("%.2f", worst_z) + ", alpha=0 chi2 " + fmt("%.2f", chi2) +
             " (< 13.82), beta=0 unit weights " + (unit ? "yes" : "no"));
}

void planted_benchmark() {
  std::vector<double> best_train, rl_test, gini_test;
  std::string per_seed;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.rows = 1000;
    sc.skip_fraction = 0.10;
    sc.planted_depth = 2;
    sc.noise = 0.05;
    sc.seed = seed;
    const auto syn = gen_synth(sc);
    const auto cfg = benchmark_config(seed);
    auto [train_set, test_set] = stratified_split(syn.data, 0.2, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = train(train_set, cfg);
    slowest = std::max(slowest, seconds_since(t0));
    telescope.add(rep);
    const auto gini_tree = greedy_gini_build(train_set, cfg.depth);
    best_train.push_back(rep.best_train_f1);
    rl_test.push_back(evaluate(rep.best_tree, test_set).f1);
    gini_test.push_back(evaluate(gini_tree, test_set).f1);
    per_seed += " [" + fmt("%.3f", best_train.back()) + "/" + fmt("%.3f", rl_test.back()) + "/" +
                fmt("%.3f", gini_test.back()) + "]";
  }
  const double mb = median(best_train), mr = median(rl_test), mg = median(gini_test);
  report("planted-tree benchmark", mb >= 0.85 && mr >= mg && slowest < 600.0,
         "median best_train_f1 " + fmt("%.3f", mb) + " (need >= 0.85), median held-out F1 RL " + fmt("%.3f", mr) +
             " vs Gini " + fmt("%.3f", mg) + "; per seed train/RL/Gini" + per_seed + "; slowest run " +
             fmt("%.1f", slowest) + " s");
}

void workflow_analogue() {
  std::vector<double> with_wlf, clf_only;
  std::vector<std::string> clf_names;
  for (std::size_t j = 0; j < 26; ++j) clf_names.push_back(std::string("f") + (j < 10 ? "0" : "") + std::to_string(j));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.rows = 1000;
    sc.skip_fraction = 0.10;
    sc.planted_depth = 2;
    sc.noise = 0.05;
    sc.workflow = true;
    sc.seed = seed;
    const auto syn = gen_synth(sc);
    auto [train_set, test_set] = stratified_split(syn.data, 0.2, seed);
    const auto cfg = benchmark_config(seed);
    const auto full = train(train_set, cfg);
    telescope.add(full);
    with_wlf.push_back(evaluate(full.best_tree, test_set).f1);
    const auto clf_train = select_features(train_set, clf_names);
    const auto clf_test = select_features(test_set, clf_names);
    const auto reduced = train(clf_train, cfg);
    telescope.add(reduced);
    clf_only.push_back(evaluate(reduced.best_tree, clf_test).f1);
  }
  const double a = median(with_wlf), b = median(clf_only);
  report("workflow features analogue", a >= b,
         "median held-out F1 CLF+WLF (K=29) " + fmt("%.3f", a) + " vs CLF only (K=26) " + fmt("%.3f", b));
}

void reward_telescoping() {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SynthConfig sc;
    sc.rows = 400;
    sc.features = 8;
    sc.seed = seed;
    sc.skip_fraction = 0.2;
    TrainConfig cfg;
    cfg.depth = static_cast<int>(seed) + 1;
    cfg.episodes = 60;
    cfg.seed = seed;
    cfg.reward_metric = seed == 2 ? RewardMetric::Auc : RewardMetric::F1;
    telescope.add(train(gen_synth(sc).data, cfg));
  }
  report("reward telescoping", telescope.worst <= 1e-12 && telescope.nonterminal_zero,
         std::to_string(telescope.runs) + " training runs, max |sum r - (s_M - s_0)| " + fmt("%.1e", telescope.worst) +
             ", non-terminal rewards all zero: " + (telescope.nonterminal_zero ? "yes" : "no"));
}

void importance_criterion() {
  SynthConfig sc;
  sc.rows = 1000;
  sc.features = 26;
  sc.informative = 1;
  sc.planted_depth = 2;
  sc.skip_fraction = 0.10;
  sc.noise = 0.05;
  sc.seed = 3;
  const auto syn = gen_synth(sc);
  const auto tree = greedy_gini_build(syn.data, 3);
  const auto imp = feature_importance(tree, syn.data);

  // Telescoping on the fitted tree and on random trees.
  double worst = 0.0;
  auto audit = [&](const ImportanceDetail& d) {
    double sum = 0.0;
    for (double u : d.node_gain) sum += u;
    worst = std::max(worst, std::abs(sum - (d.root_mass - d.leaf_mass)));
  };
  audit(imp);
  std::mt19937_64 rng(9);
  for (int d = 1; d <= 6; ++d)
    for (int rep = 0; rep < 10; ++rep) audit(feature_importance(random_tree(syn.data.schema, d, rng), syn.data));

  report("feature importance", imp.shares[0] >= 0.9 && worst <= 1e-9,
         "informative feature share " + fmt("%.4f", imp.shares[0]) + " (need >= 0.9), telescoping error " +
             fmt("%.1e", worst));
}

void cli_determinism() {
  using testing::quote;
  const std::string bin = quote(CISKIP_BIN);
  const std::vector<std::string> files = {"d.csv", "d.csv.schema.json", "d.csv.planted.json", "run/train.csv",
                                          "run/test.csv", "run/model.json", "run/checkpoint.json",
                                          "run/history.json", "run/config.json", "run/report.csv",
                                          "eval.csv", "importance.csv", "row.csv", "tag.txt"};
  auto pipeline = [&](const testing::TempDir& dir) {
    const auto p = [&](const std::string& f) { return quote(dir / f); };
    bool ok = testing::run(bin + " gen-synth --rows 600 --seed 42 --noise 0.05 --out " + p("d.csv")).status == 0;
    ok = ok && testing::run(bin + " train --data " + p("d.csv") + " --seed 42 --depth 3 --episodes 100 --out " +
                            p("run")).status == 0;
    ok = ok && testing::run(bin + " eval --model " + p("run/model.json") + " --data " + p("run/test.csv") +
                            " --split test --out " + p("eval.csv")).status == 0;
    ok = ok && testing::run(bin + " importance --model " + p("run/model.json") + " --data " + p("run/train.csv") +
                            " --out " + p("importance.csv")).status == 0;
    const auto test_csv = testing::slurp(dir / "run/test.csv");
    const auto first = test_csv.find('\n');
    const auto second = test_csv.find('\n', first + 1);
    testing::spit(dir / "row.csv", test_csv.substr(0, second + 1));
    const auto tag = testing::run(bin + " tag --seed 42 --model " + p("run/model.json") +
                                  " --message 'Update docs' --features " + p("row.csv"));
    ok = ok && (tag.status == 0 || tag.status == 1);
    testing::spit(dir / "tag.txt", tag.out + "exit " + std::to_string(tag.status) + "\n");
    return ok;
  };
  testing::TempDir a("det-a"), b("det-b");
  const bool ran = pipeline(a) && pipeline(b);
  std::size_t identical = 0;
  std::string differing;
  for (const auto& f : files) {
    const bool present = std::filesystem::exists(a / f) && std::filesystem::exists(b / f);
    if (present && testing::slurp(a / f) == testing::slurp(b / f)) ++identical;
    else differing += " " + f;
  }
  report("end-to-end determinism", ran && identical == files.size(),
         std::to_string(identical) + "/" + std::to_string(files.size()) + " artifacts byte-identical across two runs" +
             (differing.empty() ? "" : "; differing:" + differing));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"metric oracle", metric_oracle},
      {"gradient fidelity", gradient_fidelity},
      {"tree equivalence", tree_equivalence},
      {"state encoding", state_encoding},
      {"PER statistics", per_statistics},
      {"planted-tree benchmark", planted_benchmark},
      {"workflow features analogue", workflow_analogue},
      {"reward telescoping", reward_telescoping},
      {"feature importance", importance_criterion},
      {"end-to-end determinism", cli_determinism},
  };
  for (const auto& [name, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(name, false, std::string("exception: ") + e.what());
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
