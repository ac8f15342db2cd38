#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ciskip/dataset.hpp"
#include "ciskip/model_io.hpp"

namespace ciskip {

struct SynthConfig {
  std::size_t rows = 1000;
  /// Commit-level columns f00..f{K-1}, uniform on [0,1].
  std::size_t features = 26;
  double skip_fraction = 0.10;
  int planted_depth = 2;
  /// Per-row label flip probability applied after planting.
  double noise = 0.0;
  std::uint64_t seed = 1;
  /// Planted nodes draw attributes from the first `informative` commit-level
  /// columns; 0 means all of them.
  std::size_t informative = 0;
  /// Appends PBS (boolean), Fail_rate and avg_exp columns and plants the root
  /// split on PBS or Fail_rate.
  bool workflow = false;
};

struct SynthResult {
  Dataset data;
  TreeModel planted;
  /// Labels before noise.
  std::vector<Label> clean_labels;
};

/// Samples features, plants a random tree whose Skip leaves cover the
/// requested fraction of rows (within 2 points), then flips labels with
/// probability `noise`. Throws when no planted tree reaches the fraction.
SynthResult gen_synth(const SynthConfig& cfg);

}  // namespace ciskip
