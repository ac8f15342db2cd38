#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ciskip {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Skip is the positive class everywhere (metrics, tie-breaks, CSV label 1).
enum class Label : std::uint8_t { Build = 0, Skip = 1 };

const char* to_string(Label label);

enum class FeatureKind : std::uint8_t { Numeric, Boolean, Categorical };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& text);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  double min = 0.0;
  double max = 0.0;

  double span() const { return max - min; }
  /// Maps a raw value into [0,1] relative to the feature range (0 for a
  /// degenerate range).
  double normalize(double value) const;
  double denormalize(double unit) const { return min + unit * span(); }
  double clamp(double value) const;

  bool operator==(const FeatureSpec&) const = default;
};

/// Ordered, named, range-annotated feature columns.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  /// Validates names are unique, ranges ordered and booleans in [0,1].
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t k) const { return features_[k]; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  std::vector<std::string> names() const;
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Stable digest of the ordered feature names. Ranges are excluded so a
  /// model trained on one sample can score rows from another.
  std::string digest() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
};

using FeatureVector = std::vector<double>;

struct Dataset {
  FeatureSchema schema;
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;
  std::string provenance;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::size_t count(Label label) const;
  /// Subset by row index, preserving schema and provenance.
  Dataset subset(const std::vector<std::size_t>& indices) const;
  /// Throws unless every row matches the schema width and is finite.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// Recomputes min/max of every non-boolean feature from the rows.
void refit_ranges(Dataset& ds);

/// Parses CSV text with a header row and a `label` column (0 = Build,
/// 1 = Skip). Columns whose values are all 0/1 are typed Boolean. When a
/// schema is supplied its kinds and ranges are used instead of inference.
Dataset parse_csv(std::istream& in, const std::string& provenance,
                  const std::optional<FeatureSchema>& schema = std::nullopt);

/// Loads `path`, picking up `<path>.schema.json` when present.
Dataset load_csv(const std::filesystem::path& path);

void write_csv(std::ostream& out, const Dataset& ds);
void write_csv(const std::filesystem::path& path, const Dataset& ds);

/// Schema sidecar: JSON array of {name, kind, min, max}.
std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const std::string& text);
std::filesystem::path schema_sidecar_path(const std::filesystem::path& csv_path);

/// Per-class stratified partition. Each class contributes
/// floor(count * test_fraction + 0.5) rows to the test set.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

/// Pearson correlation of two equal-length columns; 0 if either is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct FilterResult {
  Dataset data;
  std::vector<std::string> dropped;
};

/// Greedy pairwise scan in schema order: whenever |r| >= threshold the later
/// feature is dropped. Constant columns survive unless an earlier column is an
/// exact duplicate.
FilterResult correlation_filter(const Dataset& ds, double threshold);

/// Keeps only the named columns, in the given order.
Dataset select_features(const Dataset& ds, const std::vector<std::string>& names);

/// Row-wise concatenation; schemas must share feature names. Ranges are the
/// union of the inputs' ranges.
Dataset concat(const std::vector<Dataset>& parts, const std::string& provenance);

std::vector<double> column(const Dataset& ds, std::size_t k);

}  // namespace ciskip
