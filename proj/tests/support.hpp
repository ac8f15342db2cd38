#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "ciskip/dataset.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ciskip-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int status = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout; stderr is discarded.
inline RunResult run(const std::string& command) {
  RunResult r;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

inline std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Numeric [0,1] columns named x0..x{k-1} with random rows and labels.
inline ciskip::Dataset random_dataset(std::size_t rows, std::size_t k, double skip_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ciskip::FeatureSpec> specs;
  for (std::size_t j = 0; j < k; ++j) specs.push_back({"x" + std::to_string(j), ciskip::FeatureKind::Numeric, 0.0, 1.0});
  ciskip::Dataset ds;
  ds.schema = ciskip::FeatureSchema(specs);
  ds.provenance = "random";
  for (std::size_t i = 0; i < rows; ++i) {
    ciskip::FeatureVector x(k);
    for (auto& v : x) v = u(rng);
    ds.rows.push_back(x);
    ds.labels.push_back(u(rng) < skip_rate ? ciskip::Label::Skip : ciskip::Label::Build);
  }
  return ds;
}

}  // namespace testing
