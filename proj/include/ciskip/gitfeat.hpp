#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ciskip/dataset.hpp"

namespace ciskip::gitfeat {

struct FileChange {
  std::string path;
  std::size_t lines_added = 0;
  std::size_t lines_deleted = 0;
  /// Line count of the file before the commit (0 for new files).
  std::size_t size_before = 0;
  std::vector<std::string> added;
  std::vector<std::string> removed;
};

struct CommitRecord {
  std::string hash;
  std::string author;
  std::int64_t timestamp = 0;
  std::vector<std::string> parents;
  std::string message;
  std::vector<FileChange> file_changes;
};

enum class BuildResult { Pass, Fail, Skipped };

struct WorkflowRecord {
  std::string commit_hash;
  BuildResult build_result = BuildResult::Pass;
  std::string committer;
  std::int64_t timestamp = 0;
};

/// Oldest-first first-parent history of `branch`. Diffs of merge commits are
/// taken against the first parent. Throws for a non-repository, an unknown
/// branch or a branch without commits.
std::vector<CommitRecord> extract_commits(const std::filesystem::path& repo, const std::string& branch);

/// Skip iff the message carries `[ci skip]` or `[skip ci]`, any case.
Label label_skip(const std::string& message);

/// Lower-cased alphanumeric tokens.
std::vector<std::string> tokenize(const std::string& text);

/// Smoothed IDF weights fitted on a message corpus.
class TermWeights {
 public:
  void fit(const std::vector<std::string>& messages);
  bool fitted() const { return fitted_; }
  double idf(const std::string& term) const;
  /// Mean TF-IDF weight over the distinct terms of `message` (0 if none).
  double mean_weight(const std::string& message) const;

 private:
  bool fitted_ = false;
  double documents_ = 0.0;
  std::map<std::string, double> df_;
};

struct CategoryRule {
  std::vector<std::string> extensions;
  std::vector<std::string> filenames;
  std::vector<std::string> path_prefixes;

  bool matches(const std::string& path) const;
};

/// File categories driving the IS_* flags, plus comment prefixes per source
/// extension for COM.
struct CategoryConfig {
  CategoryRule doc;
  CategoryRule build;
  CategoryRule meta;
  CategoryRule media;
  CategoryRule src;
  std::map<std::string, std::vector<std::string>> comment_prefixes;

  static CategoryConfig defaults();
  /// JSON object with optional keys doc/build/meta/media/src (each with
  /// extensions/filenames/path_prefixes) and comment_prefixes; missing keys
  /// keep the defaults.
  static CategoryConfig from_json(const std::string& text);
};

/// Commit message classes; values are the feature codes.
enum class ChangeClass : int {
  FeatureAddition = 1,
  Corrective = 2,
  Perfective = 4,
  Preventative = 5,
  NonFunctional = 6,
  None = 7,
};

ChangeClass classify_message(const std::string& message);

/// Names of the 26 commit-level columns, in dataset order.
const std::vector<std::string>& commit_feature_names();
/// PBS, Fail_rate, avg_exp.
const std::vector<std::string>& workflow_feature_names();
FeatureSchema commit_schema_template(bool include_workflow);

/// All commit-level feature vectors of `history`, computed in one causal
/// pass: row i only reads commits 0..i.
std::vector<FeatureVector> commit_features_all(const std::vector<CommitRecord>& history, const TermWeights& idf,
                                               const CategoryConfig& categories = CategoryConfig::defaults());

/// Feature vector of history[index]; equals commit_features_all on the
/// prefix 0..index.
FeatureVector commit_features(const std::vector<CommitRecord>& history, std::size_t index, const TermWeights& idf,
                              const CategoryConfig& categories = CategoryConfig::defaults());

struct WorkflowFeatures {
  double pbs = 1.0;
  double fail_rate = 0.0;
  double avg_exp = 0.0;
};

/// Uses only runs strictly older than history[index]; skipped runs are not
/// builds. PBS defaults to 1 without a prior build.
WorkflowFeatures workflow_features(const std::vector<CommitRecord>& history, const std::vector<WorkflowRecord>& runs,
                                   std::size_t index);

/// CSV with header commit_hash,build_result,committer,timestamp; sorted by
/// timestamp on return.
std::vector<WorkflowRecord> load_runs(const std::filesystem::path& path);

struct BuildOptions {
  bool include_workflow = false;
  /// IDF is fitted on the oldest fraction of messages.
  double idf_fit_fraction = 1.0;
  CategoryConfig categories = CategoryConfig::defaults();
};

Dataset build_dataset(const std::vector<CommitRecord>& history, const std::vector<WorkflowRecord>& runs,
                      const BuildOptions& options, const std::string& provenance);

Dataset build_dataset(const std::filesystem::path& repo, const std::string& branch,
                      const std::optional<std::vector<WorkflowRecord>>& runs, const BuildOptions& options);

}  // namespace ciskip::gitfeat
