#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ciskip/dataset.hpp"

namespace ciskip {

/// Skip is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
};

ConfusionMatrix confusion(const std::vector<Label>& predicted, const std::vector<Label>& actual);

/// precision = TP/(TP+FP) (0 when nothing is predicted Skip), recall =
/// TP/(TP+FN), F1 their harmonic mean (0 when both are 0), and
/// AUC = (1 + TPR - FPR) / 2 over hard predictions.
/// Throws when the ground truth holds a single class.
EvalScores scores(const ConfusionMatrix& cm);

/// `project,split,precision,recall,f1,auc`
std::string report_header();
std::string report_row(const std::string& project, const std::string& split, const EvalScores& s);
/// Integer percentages, as printed in summary tables.
std::string percent_summary(const EvalScores& s);

}  // namespace ciskip
