#include "ciskip/gitfeat.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace ciskip::gitfeat {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) throw Error("cannot run: " + command);
  std::array<char, 65536> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string git(const std::filesystem::path& repo) {
  return "git -C " + shell_quote(repo.string()) + " -c core.quotepath=off ";
}

std::string basename_of(const std::string& path) {
  const auto slash = path.rfind('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string extension_of(const std::string& path) {
  const std::string base = basename_of(path);
  const auto dot = base.rfind('.');
  if (dot == std::string::npos || dot == 0) return "";
  return lower(base.substr(dot + 1));
}

std::string top_dir(const std::string& path) {
  const auto slash = path.find('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

std::string strip_ws(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

std::string trim_left(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

void parse_patch(const std::string& patch, std::vector<FileChange>& files, std::vector<bool>& deleted) {
  std::istringstream in(patch);
  std::string line;
  bool in_header = false;
  while (std::getline(in, line)) {
    if (starts_with(line, "diff --git ")) {
      const std::string rest = line.substr(11);
      FileChange fc;
      if (rest.size() >= 5) fc.path = rest.substr(2, (rest.size() - 5) / 2);
      files.push_back(std::move(fc));
      deleted.push_back(false);
      in_header = true;
      continue;
    }
    if (files.empty()) continue;
    if (in_header) {
      if (starts_with(line, "deleted file mode")) deleted.back() = true;
      if (starts_with(line, "@@")) in_header = false;
      continue;
    }
    if (starts_with(line, "@@")) continue;
    if (!line.empty() && line[0] == '+') {
      files.back().added.push_back(line.substr(1));
      ++files.back().lines_added;
    } else if (!line.empty() && line[0] == '-') {
      files.back().removed.push_back(line.substr(1));
      ++files.back().lines_deleted;
    }
  }
}

// Message with skip directives removed, so the tag never leaks into the
// text features.
std::string strip_directives(const std::string& message) {
  std::string out = message;
  std::string low = lower(out);
  for (const std::string d : {"[ci skip]", "[skip ci]"}) {
    std::size_t pos;
    while ((pos = low.find(d)) != std::string::npos) {
      out.erase(pos, d.size());
      low.erase(pos, d.size());
    }
  }
  return out;
}

bool any_token_prefix(const std::vector<std::string>& tokens, const std::vector<std::string>& keys) {
  for (const auto& t : tokens)
    for (const auto& k : keys)
      if (starts_with(t, k)) return true;
  return false;
}

const std::vector<std::string> kFeatureAddition = {"add", "new", "implement", "feature"};
const std::vector<std::string> kCorrective = {"fix", "bug", "error", "fail"};
const std::vector<std::string> kPerfective = {"improv", "enhanc", "refactor", "clean"};
const std::vector<std::string> kPreventative = {"test", "junit", "spec", "coverage"};
const std::vector<std::string> kNonFunctional = {"doc", "readme", "license", "typo", "comment"};

CategoryRule rule_from_json(const nlohmann::json& j, CategoryRule base) {
  if (j.contains("extensions")) {
    base.extensions.clear();
    for (const auto& e : j.at("extensions")) base.extensions.push_back(lower(e.get<std::string>()));
  }
  if (j.contains("filenames")) base.filenames = j.at("filenames").get<std::vector<std::string>>();
  if (j.contains("path_prefixes")) base.path_prefixes = j.at("path_prefixes").get<std::vector<std::string>>();
  return base;
}

}  // namespace

std::vector<CommitRecord> extract_commits(const std::filesystem::path& repo, const std::string& branch) {
  if (run(git(repo) + "rev-parse --git-dir").status != 0)
    throw Error("'" + repo.string() + "' is not a git repository");
  if (run(git(repo) + "rev-parse --verify --quiet " + shell_quote(branch + "^{commit}")).status != 0)
    throw Error("unknown branch '" + branch + "' (or the repository has no commits)");

  const auto log = run(git(repo) + "log " + shell_quote(branch) +
                       " --first-parent --reverse --no-renames --diff-merges=first-parent --unified=0"
                       " --no-color --no-ext-diff -p --format=%x00%H%x1f%an%x1f%at%x1f%P%x1f%B%x1e --");
  if (log.status != 0) throw Error("git log failed for branch '" + branch + "'");

  std::vector<CommitRecord> out;
  std::unordered_map<std::string, std::size_t> line_counts;
  std::size_t pos = 0;
  const std::string& text = log.output;
  while ((pos = text.find('\0', pos)) != std::string::npos) {
    const std::size_t start = pos + 1;
    const std::size_t next = text.find('\0', start);
    const std::string chunk = text.substr(start, next == std::string::npos ? std::string::npos : next - start);
    pos = start;

    const auto header_end = chunk.find('\x1e');
    if (header_end == std::string::npos) throw Error("unexpected git log output");
    std::vector<std::string> fields;
    std::string field;
    std::istringstream hs(chunk.substr(0, header_end));
    while (std::getline(hs, field, '\x1f')) fields.push_back(field);
    if (fields.size() < 4) throw Error("unexpected git log header");
    fields.resize(5);

    CommitRecord rec;
    rec.hash = fields[0];
    rec.author = fields[1];
    rec.timestamp = std::stoll(fields[2]);
    std::istringstream ps(fields[3]);
    for (std::string p; ps >> p;) rec.parents.push_back(p);
    rec.message = fields[4];
    while (!rec.message.empty() && (rec.message.back() == '\n' || rec.message.back() == '\r')) rec.message.pop_back();

    std::vector<bool> deleted;
    parse_patch(chunk.substr(header_end + 1), rec.file_changes, deleted);
    for (std::size_t f = 0; f < rec.file_changes.size(); ++f) {
      auto& fc = rec.file_changes[f];
      auto it = line_counts.find(fc.path);
      const std::size_t before = it == line_counts.end() ? 0 : it->second;
      fc.size_before = before;
      if (deleted[f]) {
        line_counts.erase(fc.path);
      } else {
        const auto after = static_cast<long long>(before) + static_cast<long long>(fc.lines_added) -
                           static_cast<long long>(fc.lines_deleted);
        line_counts[fc.path] = static_cast<std::size_t>(std::max(0LL, after));
      }
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw Error("branch '" + branch + "' has no commits");
  return out;
}

Label label_skip(const std::string& message) {
  const std::string low = lower(message);
  return low.find("[ci skip]") != std::string::npos || low.find("[skip ci]") != std::string::npos ? Label::Skip
                                                                                                   : Label::Build;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void TermWeights::fit(const std::vector<std::string>& messages) {
  df_.clear();
  documents_ = static_cast<double>(messages.size());
  for (const auto& m : messages) {
    const auto tokens = tokenize(m);
    for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) df_[t] += 1.0;
  }
  fitted_ = true;
}

double TermWeights::idf(const std::string& term) const {
  if (!fitted_) throw Error("term weights used before fitting");
  auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : it->second;
  return std::log((1.0 + documents_) / (1.0 + df)) + 1.0;
}

double TermWeights::mean_weight(const std::string& message) const {
  if (!fitted_) throw Error("term weights used before fitting");
  const auto tokens = tokenize(message);
  if (tokens.empty()) return 0.0;
  std::map<std::string, double> tf;
  for (const auto& t : tokens) tf[t] += 1.0;
  double sum = 0.0;
  for (const auto& [term, count] : tf) sum += count / static_cast<double>(tokens.size()) * idf(term);
  return sum / static_cast<double>(tf.size());
}

bool CategoryRule::matches(const std::string& path) const {
  const std::string base = lower(basename_of(path));
  for (const auto& f : filenames)
    if (lower(f) == base) return true;
  const std::string ext = extension_of(path);
  if (!ext.empty())
    for (const auto& e : extensions)
      if (e == ext) return true;
  for (const auto& p : path_prefixes)
    if (starts_with(path, p)) return true;
  return false;
}

CategoryConfig CategoryConfig::defaults() {
  CategoryConfig c;
  c.doc = {{"md", "txt", "rst", "adoc", "docx", "doc", "pdf", "markdown"},
           {"README", "LICENSE", "CHANGELOG", "AUTHORS", "CONTRIBUTORS", "NOTICE", "COPYING"},
           {"docs/", "doc/"}};
  c.build = {{"gradle", "cmake", "mk", "sbt"},
             {"pom.xml", "Makefile", "CMakeLists.txt", "build.xml", "Gemfile", "Gemfile.lock", "Rakefile",
              "package.json", "setup.py", "gradlew", "build.sbt"},
             {".travis.yml", ".github/workflows/", ".circleci/", ".gitlab-ci.yml", "appveyor.yml", "Jenkinsfile"}};
  c.meta = {{}, {".gitignore", ".gitattributes", ".mailmap", ".editorconfig", ".gitmodules"}, {}};
  c.media = {{"png", "jpg", "jpeg", "gif", "svg", "ico", "bmp", "mp3", "mp4", "wav", "ogg", "avi", "mov"}, {}, {}};
  c.src = {{"java", "rb", "py", "c", "cc", "cpp", "cxx", "h", "hpp", "js", "ts", "go", "rs", "kt", "scala", "cs",
            "php", "swift", "m"},
           {},
           {}};
  const std::vector<std::string> c_like = {"//", "/*", "*", "*/"};
  for (const auto* e : {"java", "c", "cc", "cpp", "cxx", "h", "hpp", "js", "ts", "go", "rs", "kt", "scala", "cs",
                        "php", "swift", "m"})
    c.comment_prefixes[e] = c_like;
  c.comment_prefixes["py"] = {"#"};
  c.comment_prefixes["rb"] = {"#"};
  return c;
}

CategoryConfig CategoryConfig::from_json(const std::string& text) {
  CategoryConfig c = defaults();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid category config: ") + e.what());
  }
  if (j.contains("doc")) c.doc = rule_from_json(j.at("doc"), c.doc);
  if (j.contains("build")) c.build = rule_from_json(j.at("build"), c.build);
  if (j.contains("meta")) c.meta = rule_from_json(j.at("meta"), c.meta);
  if (j.contains("media")) c.media = rule_from_json(j.at("media"), c.media);
  if (j.contains("src")) c.src = rule_from_json(j.at("src"), c.src);
  if (j.contains("comment_prefixes"))
    c.comment_prefixes = j.at("comment_prefixes").get<std::map<std::string, std::vector<std::string>>>();
  return c;
}

ChangeClass classify_message(const std::string& message) {
  const auto tokens = tokenize(strip_directives(message));
  if (any_token_prefix(tokens, kFeatureAddition)) return ChangeClass::FeatureAddition;
  if (any_token_prefix(tokens, kCorrective)) return ChangeClass::Corrective;
  if (any_token_prefix(tokens, kPerfective)) return ChangeClass::Perfective;
  if (any_token_prefix(tokens, kPreventative)) return ChangeClass::Preventative;
  if (any_token_prefix(tokens, kNonFunctional)) return ChangeClass::NonFunctional;
  return ChangeClass::None;
}

const std::vector<std::string>& commit_feature_names() {
  static const std::vector<std::string> names = {
      "NS",     "ENTROPY",  "LA",     "LD",       "Day_week", "CM",     "TFC", "CLASSIF", "IS_FIX",
      "IS_DOC", "IS_BUILD", "IS_META", "IS_MERGE", "IS_MEDIA", "IS_SRC", "FRM", "COM",     "PRS",
      "PCR",    "SC",       "NUC",    "AGE",      "NDEV",     "LT",     "EXP", "SEXP"};
  return names;
}

const std::vector<std::string>& workflow_feature_names() {
  static const std::vector<std::string> names = {"PBS", "Fail_rate", "avg_exp"};
  return names;
}

FeatureSchema commit_schema_template(bool include_workflow) {
  static const std::set<std::string> booleans = {"IS_FIX",   "IS_DOC", "IS_BUILD", "IS_META", "IS_MERGE", "IS_MEDIA",
                                                 "IS_SRC",   "FRM",    "COM",      "PCR",     "SC",       "PBS"};
  static const std::set<std::string> categorical = {"Day_week", "CLASSIF"};
  std::vector<std::string> names = commit_feature_names();
  if (include_workflow) names.insert(names.end(), workflow_feature_names().begin(), workflow_feature_names().end());
  std::vector<FeatureSpec> specs;
  for (const auto& n : names) {
    if (booleans.count(n)) specs.push_back({n, FeatureKind::Boolean, 0.0, 1.0});
    else if (categorical.count(n)) specs.push_back({n, FeatureKind::Categorical, 0.0, 0.0});
    else specs.push_back({n, FeatureKind::Numeric, 0.0, 0.0});
  }
  return FeatureSchema(std::move(specs));
}

std::vector<FeatureVector> commit_features_all(const std::vector<CommitRecord>& history, const TermWeights& idf,
                                               const CategoryConfig& cat) {
  if (!idf.fitted()) throw Error("term weights used before fitting");
  struct FileHistory {
    std::int64_t last_modified = 0;
    std::set<std::string> authors;
    std::vector<std::size_t> commits;
  };
  std::unordered_map<std::string, FileHistory> files;
  std::unordered_map<std::string, std::vector<std::size_t>> author_commits;
  std::vector<std::set<std::string>> commit_dirs;
  std::vector<std::vector<std::string>> commit_files;
  std::vector<Label> labels;

  std::vector<FeatureVector> out;
  out.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    const CommitRecord& c = history[i];
    const auto& changes = c.file_changes;

    std::set<std::string> dirs, exts;
    std::vector<std::string> paths;
    double la = 0, ld = 0, lt = 0;
    for (const auto& fc : changes) {
      dirs.insert(top_dir(fc.path));
      exts.insert(extension_of(fc.path));
      paths.push_back(fc.path);
      la += fc.lines_added;
      ld += fc.lines_deleted;
      lt += fc.size_before;
    }

    double entropy = 0.0;
    const double churn = la + ld;
    if (churn > 0.0)
      for (const auto& fc : changes) {
        const double p = (fc.lines_added + fc.lines_deleted) / churn;
        if (p > 0.0) entropy -= p * std::log2(p);
      }

    const std::int64_t days = c.timestamp >= 0 ? c.timestamp / 86400 : (c.timestamp - 86399) / 86400;
    const double day_week = static_cast<double>(((days + 4) % 7 + 7) % 7);

    const std::string text = strip_directives(c.message);
    const auto tokens = tokenize(text);

    auto all_match = [&](const CategoryRule& r) {
      if (changes.empty()) return false;
      for (const auto& fc : changes)
        if (!r.matches(fc.path)) return false;
      return true;
    };

    bool frm = !changes.empty();
    std::size_t changed = 0;
    for (const auto& fc : changes) {
      changed += fc.lines_added + fc.lines_deleted;
      std::vector<std::string> a, r;
      for (const auto& l : fc.added)
        if (auto s = strip_ws(l); !s.empty()) a.push_back(std::move(s));
      for (const auto& l : fc.removed)
        if (auto s = strip_ws(l); !s.empty()) r.push_back(std::move(s));
      std::sort(a.begin(), a.end());
      std::sort(r.begin(), r.end());
      if (a != r) frm = false;
    }
    if (changed == 0) frm = false;

    bool com = !changes.empty();
    std::size_t commented = 0;
    for (const auto& fc : changes) {
      auto it = cat.comment_prefixes.find(extension_of(fc.path));
      if (it == cat.comment_prefixes.end()) {
        com = false;
        break;
      }
      auto is_comment = [&](const std::string& line) {
        const std::string t = trim_left(line);
        if (t.empty()) return true;
        ++commented;
        for (const auto& p : it->second)
          if (starts_with(t, p)) return true;
        return false;
      };
      for (const auto& l : fc.added) com = com && is_comment(l);
      for (const auto& l : fc.removed) com = com && is_comment(l);
    }
    if (commented == 0) com = false;

    double prs = 0.0;
    for (std::size_t j = i >= 5 ? i - 5 : 0; j < i; ++j) prs += labels[j] == Label::Skip;
    const double pcr = i > 0 && labels[i - 1] == Label::Skip ? 1.0 : 0.0;
    const double sc = i > 0 && history[i - 1].author == c.author ? 1.0 : 0.0;

    std::set<std::string> unique_files, devs;
    double age_sum = 0.0;
    for (const auto& p : paths) {
      auto it = files.find(p);
      if (it == files.end()) continue;
      for (auto j : it->second.commits)
        for (const auto& f : commit_files[j]) unique_files.insert(f);
      devs.insert(it->second.authors.begin(), it->second.authors.end());
      age_sum += static_cast<double>(c.timestamp - it->second.last_modified) / 86400.0;
    }
    const double age = paths.empty() ? 0.0 : age_sum / static_cast<double>(paths.size());

    double exp = 0.0, sexp = 0.0;
    if (auto it = author_commits.find(c.author); it != author_commits.end()) {
      exp = static_cast<double>(it->second.size());
      for (auto j : it->second) {
        const bool shared = std::any_of(commit_dirs[j].begin(), commit_dirs[j].end(),
                                        [&](const std::string& d) { return dirs.count(d) > 0; });
        sexp += shared;
      }
    }

    const auto cls = classify_message(c.message);
    out.push_back({static_cast<double>(dirs.size()),
                   entropy,
                   la,
                   ld,
                   day_week,
                   idf.mean_weight(text),
                   static_cast<double>(exts.size()),
                   static_cast<double>(static_cast<int>(cls)),
                   any_token_prefix(tokens, kCorrective) ? 1.0 : 0.0,
                   all_match(cat.doc) ? 1.0 : 0.0,
                   all_match(cat.build) ? 1.0 : 0.0,
                   all_match(cat.meta) ? 1.0 : 0.0,
                   c.parents.size() > 1 ? 1.0 : 0.0,
                   all_match(cat.media) ? 1.0 : 0.0,
                   all_match(cat.src) ? 1.0 : 0.0,
                   frm ? 1.0 : 0.0,
                   com ? 1.0 : 0.0,
                   prs,
                   pcr,
                   sc,
                   static_cast<double>(unique_files.size()),
                   age,
                   static_cast<double>(devs.size()),
                   lt,
                   exp,
                   sexp});

    // History now includes commit i.
    for (const auto& p : paths) {
      auto& fh = files[p];
      fh.last_modified = c.timestamp;
      fh.authors.insert(c.author);
      fh.commits.push_back(i);
    }
    author_commits[c.author].push_back(i);
    commit_dirs.push_back(std::move(dirs));
    commit_files.push_back(std::move(paths));
    labels.push_back(label_skip(c.message));
  }
  return out;
}

FeatureVector commit_features(const std::vector<CommitRecord>& history, std::size_t index, const TermWeights& idf,
                              const CategoryConfig& categories) {
  if (index >= history.size()) throw Error("commit index out of range");
  const std::vector<CommitRecord> prefix(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(index) + 1);
  return commit_features_all(prefix, idf, categories).back();
}

WorkflowFeatures workflow_features(const std::vector<CommitRecord>& history, const std::vector<WorkflowRecord>& runs,
                                   std::size_t index) {
  if (index >= history.size()) throw Error("commit index out of range");
  const CommitRecord& c = history[index];
  WorkflowFeatures out;
  std::map<std::string, std::size_t> builds_by;
  std::size_t mine = 0, mine_failed = 0, total = 0;
  const WorkflowRecord* last = nullptr;
  for (const auto& r : runs) {
    if (r.timestamp >= c.timestamp) continue;
    if (r.build_result == BuildResult::Skipped) continue;
    if (!last || r.timestamp >= last->timestamp) last = &r;
    ++builds_by[r.committer];
    ++total;
    if (r.committer == c.author) {
      ++mine;
      mine_failed += r.build_result == BuildResult::Fail;
    }
  }
  if (last) out.pbs = last->build_result == BuildResult::Pass ? 1.0 : 0.0;
  if (mine > 0) out.fail_rate = static_cast<double>(mine_failed) / static_cast<double>(mine);
  if (!builds_by.empty()) out.avg_exp = static_cast<double>(total) / static_cast<double>(builds_by.size());
  return out;
}

std::vector<WorkflowRecord> load_runs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open runs log '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<WorkflowRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "commit_hash,build_result,committer,timestamp")
        throw Error(path.string() + ": line 1: expected header commit_hash,build_result,committer,timestamp");
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (cells.size() != 4) throw Error(where + ": expected 4 cells");
    WorkflowRecord r;
    r.commit_hash = cells[0];
    const std::string res = lower(cells[1]);
    if (res == "pass" || res == "passed" || res == "success") r.build_result = BuildResult::Pass;
    else if (res == "fail" || res == "failed" || res == "failure") r.build_result = BuildResult::Fail;
    else if (res == "skipped" || res == "skip") r.build_result = BuildResult::Skipped;
    else throw Error(where + ": unknown build result '" + cells[1] + "'");
    r.committer = cells[2];
    try {
      r.timestamp = std::stoll(cells[3]);
    } catch (const std::exception&) {
      throw Error(where + ": bad timestamp '" + cells[3] + "'");
    }
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const WorkflowRecord& a, const WorkflowRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

Dataset build_dataset(const std::vector<CommitRecord>& history, const std::vector<WorkflowRecord>& runs,
                      const BuildOptions& options, const std::string& provenance) {
  if (history.empty()) throw Error("no commits to build a dataset from");
  if (!(options.idf_fit_fraction > 0.0 && options.idf_fit_fraction <= 1.0))
    throw Error("IDF fit fraction must lie in (0,1]");

  const auto fit_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.idf_fit_fraction * static_cast<double>(history.size()))));
  std::vector<std::string> corpus;
  for (std::size_t i = 0; i < fit_count && i < history.size(); ++i) corpus.push_back(strip_directives(history[i].message));
  TermWeights idf;
  idf.fit(corpus);

  Dataset ds;
  ds.provenance = provenance;
  ds.schema = commit_schema_template(options.include_workflow);
  ds.rows = commit_features_all(history, idf, options.categories);
  for (std::size_t i = 0; i < history.size(); ++i) {
    ds.labels.push_back(label_skip(history[i].message));
    if (options.include_workflow) {
      const auto w = workflow_features(history, runs, i);
      ds.rows[i].insert(ds.rows[i].end(), {w.pbs, w.fail_rate, w.avg_exp});
    }
  }
  refit_ranges(ds);
  ds.validate();
  return ds;
}

Dataset build_dataset(const std::filesystem::path& repo, const std::string& branch,
                      const std::optional<std::vector<WorkflowRecord>>& runs, const BuildOptions& options) {
  if (options.include_workflow && !runs) throw Error("workflow features need a runs log");
  const auto history = extract_commits(repo, branch);
  const std::string name = std::filesystem::absolute(repo).lexically_normal().filename().string();
  return build_dataset(history, runs ? *runs : std::vector<WorkflowRecord>{}, options,
                       name.empty() ? std::string("repo") : name);
}

}  // namespace ciskip::gitfeat
