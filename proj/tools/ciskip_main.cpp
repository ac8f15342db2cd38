// ciskip: CI-skip decision trees learned by parameterised deep Q-learning.
//
// Exit codes: 0 success (and "skip" for `tag`), 1 "build" for `tag`, 2 errors.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ciskip/dataset.hpp"
#include "ciskip/gitfeat.hpp"
#include "ciskip/metrics.hpp"
#include "ciskip/model_io.hpp"
#include "ciskip/synth.hpp"
#include "ciskip/trainer.hpp"
#include "ciskip/tree.hpp"

namespace fs = std::filesystem;
using namespace ciskip;

namespace {

constexpr int kExitError = 2;

struct TrainFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> depth;
  std::optional<std::size_t> episodes;
  std::string config;
  std::string baseline;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--depth", f.depth, "Tree depth");
  cmd->add_option("--episodes", f.episodes, "Training episodes");
  cmd->add_option("--config", f.config, "Run config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--baseline", f.baseline, "Also score a baseline learner")->check(CLI::IsMember({"gini"}));
}

TrainConfig resolve_config(const TrainFlags& f) {
  TrainConfig cfg;
  if (!f.config.empty()) cfg = load_train_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.depth) cfg.depth = *f.depth;
  if (f.episodes) cfg.episodes = *f.episodes;
  cfg.validate();
  return cfg;
}

void write_dataset(const fs::path& csv, const Dataset& ds) {
  write_csv(csv, ds);
  write_text(schema_sidecar_path(csv), schema_to_json(ds.schema) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
}

int cmd_extract(const std::string& repo, const std::string& branch, const std::string& runs_path, bool workflow,
                const std::string& config, double idf_fraction, const std::string& out) {
  if (workflow && runs_path.empty()) {
    std::cerr << "extract: --workflow requires --runs <log.csv>\n";
    return kExitError;
  }
  gitfeat::BuildOptions opts;
  opts.include_workflow = workflow;
  opts.idf_fit_fraction = idf_fraction;
  if (!config.empty()) opts.categories = gitfeat::CategoryConfig::from_json(read_text(config));
  std::optional<std::vector<gitfeat::WorkflowRecord>> runs;
  if (!runs_path.empty()) runs = gitfeat::load_runs(runs_path);
  const auto ds = gitfeat::build_dataset(repo, branch, runs, opts);
  write_dataset(out, ds);
  std::cout << "extracted " << ds.size() << " commits (" << ds.count(Label::Skip) << " skip) with "
            << ds.schema.size() << " features to " << out << "\n";
  return 0;
}

int cmd_gen_synth(const SynthConfig& cfg, const std::string& out) {
  const auto result = gen_synth(cfg);
  write_dataset(out, result.data);
  save_model(out + ".planted.json", result.planted);
  std::cout << "generated " << result.data.size() << " rows (" << result.data.count(Label::Skip) << " skip) to "
            << out << "\n";
  return 0;
}

std::string baseline_row(const std::string& project, const Dataset& train_set, const Dataset& test_set,
                         int depth) {
  const auto tree = greedy_gini_build(train_set, depth);
  return report_row(project, "test-gini", evaluate(tree, test_set));
}

int cmd_train(const std::string& data, const TrainFlags& flags, const std::string& out, double test_fraction,
              bool depth_sweep) {
  TrainConfig cfg = resolve_config(flags);
  const Dataset ds = load_csv(data);
  ensure_dir(out);
  auto [train_set, test_set] = stratified_split(ds, test_fraction, cfg.seed);
  write_dataset(fs::path(out) / "train.csv", train_set);
  write_dataset(fs::path(out) / "test.csv", test_set);

  if (depth_sweep) {
    cfg.depth = sweep_depth(train_set, cfg, {3, 4, 5});
    std::cout << "depth sweep selected d=" << cfg.depth << "\n";
  }

  Agent agent;
  std::mt19937_64 rng;
  const auto report = train(train_set, cfg, &agent, &rng);
  const TreeModel model{train_set.schema, report.best_tree};
  save_model(fs::path(out) / "model.json", model);
  write_text(fs::path(out) / "checkpoint.json", checkpoint_to_json(agent, cfg, rng));
  write_text(fs::path(out) / "history.json", history_to_json(report).dump(2) + "\n");
  write_text(fs::path(out) / "config.json", to_json(cfg).dump(2) + "\n");

  const auto train_scores = evaluate(report.best_tree, train_set);
  const auto test_scores = evaluate(report.best_tree, test_set);
  std::ostringstream csv;
  csv << report_header() << "\n"
      << report_row(ds.provenance, "train", train_scores) << "\n"
      << report_row(ds.provenance, "test", test_scores) << "\n";
  if (flags.baseline == "gini") csv << baseline_row(ds.provenance, train_set, test_set, cfg.depth) << "\n";
  write_text(fs::path(out) / "report.csv", csv.str());

  std::cout << "best train F1 " << report.best_train_f1 << "\n";
  std::cout << ds.provenance << " test: " << percent_summary(test_scores) << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& out,
             const std::string& split) {
  const auto model = load_model(model_path);
  const auto ds = load_csv(data);
  require_same_schema(model, ds.schema);
  const auto s = evaluate(model.tree, ds);
  const std::string text = report_header() + "\n" + report_row(ds.provenance, split, s) + "\n";
  if (!out.empty()) write_text(out, text);
  std::cout << text << ds.provenance << " " << split << ": " << percent_summary(s) << "\n";
  return 0;
}

int cmd_cross(const std::vector<std::string>& data, const TrainFlags& flags, const std::string& out) {
  const TrainConfig cfg = resolve_config(flags);
  std::vector<Dataset> projects;
  for (const auto& d : data) projects.push_back(load_csv(d));
  ensure_dir(out);
  const auto results = cross_project(projects, cfg);
  std::ostringstream csv;
  csv << report_header() << "\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    csv << report_row(r.project, "cross", r.scores) << "\n";
    if (flags.baseline == "gini")
      csv << baseline_row(r.project, cross_project_training_set(projects, i), projects[i], cfg.depth) << "\n";
    save_model(fs::path(out) / ("model-" + r.project + ".json"), {projects[i].schema, r.tree});
    std::cout << r.project << " cross: " << percent_summary(r.scores) << "\n";
  }
  write_text(fs::path(out) / "report.csv", csv.str());
  return 0;
}

int cmd_importance(const std::string& model_path, const std::string& data, const std::string& out) {
  const auto model = load_model(model_path);
  const auto ds = load_csv(data);
  require_same_schema(model, ds.schema);
  const auto detail = feature_importance(model.tree, ds);
  std::vector<std::size_t> order(detail.shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return detail.shares[a] > detail.shares[b]; });
  std::ostringstream csv;
  csv << "feature,share\n";
  for (auto k : order) {
    if (detail.shares[k] <= 0.0) continue;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", detail.shares[k]);
    csv << ds.schema[k].name << "," << buf << "\n";
  }
  if (!out.empty()) write_text(out, csv.str());
  std::cout << csv.str();
  return 0;
}

// Reads one feature row from a CSV whose header must name exactly the model's
// features (an optional `label` column is ignored).
FeatureVector read_feature_row(const std::string& path, const TreeModel& model, bool& schema_ok) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string header, row;
  std::getline(in, header);
  while (std::getline(in, row) && row.find_first_not_of(" \t\r") == std::string::npos) {
  }
  auto split = [](std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    return cells;
  };
  const auto names = split(header);
  const auto cells = split(row);
  if (cells.size() != names.size()) throw Error(path + ": line 2: expected " + std::to_string(names.size()) + " cells");
  std::vector<FeatureSpec> specs;
  FeatureVector x;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == "label") continue;
    specs.push_back({names[c], FeatureKind::Numeric, 0.0, 0.0});
    try {
      std::size_t used = 0;
      x.push_back(std::stod(cells[c], &used));
      if (used != cells[c].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(path + ": line 2: non-numeric cell '" + cells[c] + "'");
    }
  }
  schema_ok = !specs.empty() && FeatureSchema(specs).digest() == model.schema.digest();
  return x;
}

int cmd_tag(const std::string& model_path, const std::string& message, const std::string& features) {
  const auto model = load_model(model_path);
  bool schema_ok = false;
  const auto x = read_feature_row(features, model, schema_ok);
  if (!schema_ok) {
    std::cerr << "tag: feature columns do not match the model schema\n";
    return kExitError;
  }
  if (gitfeat::label_skip(message) == Label::Skip) {
    std::cout << message << "\n";
    return 0;
  }
  if (model.tree.classify(x) == Label::Skip) {
    std::cout << message << " [CI SKIP]\n";
    return 0;
  }
  std::cout << message << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn and apply CI-skip decision trees"};
  app.require_subcommand(1);

  std::string repo, branch = "HEAD", runs, ext_config, out;
  bool workflow = false;
  double idf_fraction = 1.0;
  auto* extract = app.add_subcommand("extract", "Mine commit features from a git repository into a CSV");
  extract->add_option("--repo", repo, "Repository path")->required();
  extract->add_option("--branch", branch, "Branch or revision");
  extract->add_option("--runs", runs, "Workflow-run log CSV")->check(CLI::ExistingFile);
  extract->add_flag("--workflow", workflow, "Add PBS, Fail_rate and avg_exp columns");
  extract->add_option("--config", ext_config, "File-category config (JSON)")->check(CLI::ExistingFile);
  extract->add_option("--idf-fit-fraction", idf_fraction, "Fit message IDF on the oldest fraction of commits");
  extract->add_option("--out", out, "Output CSV")->required();

  SynthConfig synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Generate a planted-tree benchmark dataset");
  gen->add_option("--rows", synth.rows, "Row count");
  gen->add_option("--skip-fraction", synth.skip_fraction, "Target Skip fraction");
  gen->add_option("--planted-depth", synth.planted_depth, "Depth of the planted tree");
  gen->add_option("--noise", synth.noise, "Label flip probability");
  gen->add_option("--seed", synth.seed, "RNG seed");
  gen->add_option("--features", synth.features, "Commit-level feature count");
  gen->add_option("--informative", synth.informative, "Planted tree only uses the first N features (0 = all)");
  gen->add_flag("--workflow", synth.workflow, "Add workflow columns and plant the root on them");
  gen->add_option("--out", synth_out, "Output CSV")->required();

  std::string data, train_out;
  double test_fraction = 0.2;
  bool depth_sweep = false;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train on 80% of a dataset and score the held-out 20%");
  train_cmd->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  add_train_flags(train_cmd, train_flags);
  train_cmd->add_option("--test-fraction", test_fraction, "Held-out fraction");
  train_cmd->add_flag("--depth-sweep", depth_sweep, "Pick depth from {3,4,5} on an inner validation split");
  train_cmd->add_option("--out", train_out, "Output directory")->required();

  std::string model, eval_out, split = "test";
  auto* eval = app.add_subcommand("eval", "Score a model on a dataset");
  eval->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split, "Split name written to the report");
  eval->add_option("--out", eval_out, "Report CSV");

  std::vector<std::string> cross_data;
  std::string cross_out;
  TrainFlags cross_flags;
  auto* cross = app.add_subcommand("cross", "Leave-one-project-out validation");
  cross->add_option("--data", cross_data, "Project CSVs")->required()->expected(2, -1)->check(CLI::ExistingFile);
  add_train_flags(cross, cross_flags);
  cross->add_option("--out", cross_out, "Output directory")->required();

  std::string imp_out;
  auto* importance = app.add_subcommand("importance", "Rank features by impurity decrease");
  importance->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  importance->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  importance->add_option("--out", imp_out, "Output CSV");

  std::string message, features;
  std::uint64_t tag_seed = 0;
  auto* tag = app.add_subcommand("tag", "Append [CI SKIP] to a commit message when the model predicts Skip");
  tag->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  tag->add_option("--message", message, "Commit message")->required();
  tag->add_option("--features", features, "Single-row feature CSV")->required()->check(CLI::ExistingFile);
  tag->add_option("--seed", tag_seed, "Accepted for interface uniformity; tagging is deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*extract) return cmd_extract(repo, branch, runs, workflow, ext_config, idf_fraction, out);
    if (*gen) return cmd_gen_synth(synth, synth_out);
    if (*train_cmd) return cmd_train(data, train_flags, train_out, test_fraction, depth_sweep);
    if (*eval) return cmd_eval(model, data, eval_out, split);
    if (*cross) return cmd_cross(cross_data, cross_flags, cross_out);
    if (*importance) return cmd_importance(model, data, imp_out);
    if (*tag) return cmd_tag(model, message, features);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
