#include "ciskip/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ciskip {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double v) {
  // Shortest round-trip representation keeps write/parse lossless.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(Label label) { return label == Label::Skip ? "Skip" : "Build"; }

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::Boolean: return "boolean";
    case FeatureKind::Categorical: return "categorical";
  }
  return "numeric";
}

FeatureKind feature_kind_from_string(const std::string& text) {
  if (text == "numeric") return FeatureKind::Numeric;
  if (text == "boolean") return FeatureKind::Boolean;
  if (text == "categorical" || text == "categorical-coded") return FeatureKind::Categorical;
  throw Error("unknown feature kind '" + text + "'");
}

double FeatureSpec::normalize(double value) const {
  const double s = span();
  if (s <= 0.0) return 0.0;
  return std::clamp((value - min) / s, 0.0, 1.0);
}

double FeatureSpec::clamp(double value) const { return std::clamp(value, min, max); }

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  if (features_.empty()) throw Error("schema needs at least one feature");
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f.name).second) throw Error("duplicate feature name '" + f.name + "'");
    if (!std::isfinite(f.min) || !std::isfinite(f.max) || f.min > f.max)
      throw Error("feature '" + f.name + "' has an invalid range");
    if (f.kind == FeatureKind::Boolean && (f.min != 0.0 || f.max != 1.0))
      throw Error("boolean feature '" + f.name + "' must have range [0,1]");
  }
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < features_.size(); ++k)
    if (features_[k].name == name) return k;
  return std::nullopt;
}

std::string FeatureSchema::digest() const {
  // FNV-1a over the names, NUL separated.
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& f : features_) {
    for (unsigned char c : f.name) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.schema = schema;
  out.provenance = provenance;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

void Dataset::validate() const {
  if (rows.size() != labels.size()) throw Error("row/label count mismatch");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != schema.size())
      throw Error("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                  " values, schema has " + std::to_string(schema.size()));
    for (double v : rows[i])
      if (!std::isfinite(v)) throw Error("row " + std::to_string(i) + " has a non-finite value");
  }
}

std::vector<double> column(const Dataset& ds, std::size_t k) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& r : ds.rows) out.push_back(r[k]);
  return out;
}

void refit_ranges(Dataset& ds) {
  std::vector<FeatureSpec> specs = ds.schema.features();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (specs[k].kind == FeatureKind::Boolean || ds.empty()) continue;
    double lo = ds.rows.front()[k], hi = lo;
    for (const auto& r : ds.rows) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
    }
    specs[k].min = lo;
    specs[k].max = hi;
  }
  ds.schema = FeatureSchema(std::move(specs));
}

Dataset parse_csv(std::istream& in, const std::string& provenance,
                  const std::optional<FeatureSchema>& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(provenance + ": empty file");
  for (auto& h : header) h = trim(h);

  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == "label") label_col = c;
  if (label_col == header.size()) throw Error(provenance + ": line 1: no 'label' column");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) names.push_back(header[c]);
  if (names.empty()) throw Error(provenance + ": line 1: no feature columns");

  Dataset ds;
  ds.provenance = provenance;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    const std::string where = provenance + ": line " + std::to_string(line_no);
    if (cells.size() != header.size())
      throw Error(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                  std::to_string(cells.size()));
    FeatureVector row;
    row.reserve(names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (c == label_col) {
        if (cell == "0") ds.labels.push_back(Label::Build);
        else if (cell == "1") ds.labels.push_back(Label::Skip);
        else throw Error(where + ": unknown label value '" + cell + "'");
        continue;
      }
      auto v = parse_number(cell);
      if (!v) throw Error(where + ": non-numeric cell '" + cell + "' in column '" + header[c] + "'");
      row.push_back(*v);
    }
    ds.rows.push_back(std::move(row));
  }
  if (ds.rows.empty()) throw Error(provenance + ": no data rows");

  if (schema) {
    if (schema->names() != names) throw Error(provenance + ": schema sidecar does not match header");
    ds.schema = *schema;
    ds.validate();
    return ds;
  }

  std::vector<FeatureSpec> specs;
  for (std::size_t k = 0; k < names.size(); ++k) {
    bool binary = true;
    double lo = ds.rows.front()[k], hi = lo;
    for (const auto& r : ds.rows) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
      if (r[k] != 0.0 && r[k] != 1.0) binary = false;
    }
    if (binary) specs.push_back({names[k], FeatureKind::Boolean, 0.0, 1.0});
    else specs.push_back({names[k], FeatureKind::Numeric, lo, hi});
  }
  ds.schema = FeatureSchema(std::move(specs));
  return ds;
}

std::filesystem::path schema_sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".schema.json");
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::optional<FeatureSchema> schema;
  const auto sidecar = schema_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream sin(sidecar);
    std::stringstream buf;
    buf << sin.rdbuf();
    schema = schema_from_json(buf.str());
  }
  return parse_csv(in, path.stem().string(), schema);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  for (const auto& f : ds.schema.features()) out << f.name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.rows[i]) out << format_number(v) << ',';
    out << (ds.labels[i] == Label::Skip ? '1' : '0') << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_csv(out, ds);
}

std::string schema_to_json(const FeatureSchema& schema) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : schema.features())
    arr.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"min", f.min}, {"max", f.max}});
  return arr.dump(2);
}

FeatureSchema schema_from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw Error("schema JSON must be an array");
  std::vector<FeatureSpec> specs;
  for (const auto& f : arr)
    specs.push_back({f.at("name").get<std::string>(),
                     feature_kind_from_string(f.at("kind").get<std::string>()),
                     f.at("min").get<double>(), f.at("max").get<double>()});
  return FeatureSchema(std::move(specs));
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("test fraction must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (Label c : {Label::Skip, Label::Build}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == c) members.push_back(i);
    if (members.size() < 2)
      throw Error(std::string("class ") + to_string(c) + " has fewer than 2 rows");
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(members.size()) * test_fraction + 0.5));
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + n_test);
    train_idx.insert(train_idx.end(), members.begin() + n_test, members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

FilterResult correlation_filter(const Dataset& ds, double threshold) {
  const std::size_t k = ds.schema.size();
  std::vector<std::vector<double>> cols;
  cols.reserve(k);
  for (std::size_t j = 0; j < k; ++j) cols.push_back(column(ds, j));

  std::vector<bool> dropped(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    if (dropped[i]) continue;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (dropped[j]) continue;
      const bool duplicate = cols[i] == cols[j];
      if (duplicate || std::abs(pearson(cols[i], cols[j])) >= threshold) dropped[j] = true;
    }
  }

  FilterResult out;
  std::vector<std::string> keep;
  for (std::size_t j = 0; j < k; ++j) {
    if (dropped[j]) out.dropped.push_back(ds.schema[j].name);
    else keep.push_back(ds.schema[j].name);
  }
  out.data = select_features(ds, keep);
  return out;
}

Dataset select_features(const Dataset& ds, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  std::vector<FeatureSpec> specs;
  for (const auto& n : names) {
    auto k = ds.schema.index_of(n);
    if (!k) throw Error("unknown feature '" + n + "'");
    idx.push_back(*k);
    specs.push_back(ds.schema[*k]);
  }
  Dataset out;
  out.schema = FeatureSchema(std::move(specs));
  out.provenance = ds.provenance;
  out.labels = ds.labels;
  out.rows.reserve(ds.size());
  for (const auto& r : ds.rows) {
    FeatureVector row;
    row.reserve(idx.size());
    for (auto k : idx) row.push_back(r[k]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

Dataset concat(const std::vector<Dataset>& parts, const std::string& provenance) {
  if (parts.empty()) throw Error("nothing to concatenate");
  std::vector<FeatureSpec> specs = parts.front().schema.features();
  const auto names = parts.front().schema.names();
  Dataset out;
  out.provenance = provenance;
  for (const auto& p : parts) {
    if (p.schema.names() != names)
      throw Error("schema mismatch between '" + parts.front().provenance + "' and '" +
                  p.provenance + "'");
    for (std::size_t k = 0; k < specs.size(); ++k) {
      specs[k].min = std::min(specs[k].min, p.schema[k].min);
      specs[k].max = std::max(specs[k].max, p.schema[k].max);
      if (specs[k].kind != p.schema[k].kind) specs[k].kind = FeatureKind::Numeric;
    }
    out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  out.schema = FeatureSchema(std::move(specs));
  return out;
}

}  // namespace ciskip
