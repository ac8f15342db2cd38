#include "ciskip/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace ciskip {

ConfusionMatrix confusion(const std::vector<Label>& predicted, const std::vector<Label>& actual) {
  if (predicted.size() != actual.size())
    throw Error("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                std::to_string(actual.size()) + " labels");
  if (predicted.empty()) throw Error("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == Label::Skip;
    const bool a = actual[i] == Label::Skip;
    if (p && a) ++cm.tp;
    else if (p) ++cm.fp;
    else if (a) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

EvalScores scores(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0 || cm.fp + cm.tn == 0)
    throw Error("scores: ground truth contains a single class");
  const auto tp = static_cast<double>(cm.tp);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);
  const auto tn = static_cast<double>(cm.tn);

  EvalScores s;
  s.recall = tp / (tp + fn);
  s.precision = (cm.tp + cm.fp) == 0 ? 0.0 : tp / (tp + fp);
  const double denom = s.precision + s.recall;
  s.f1 = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  s.auc = (1.0 + s.recall - fp / (fp + tn)) / 2.0;
  return s;
}

std::string report_header() { return "project,split,precision,recall,f1,auc"; }

std::string report_row(const std::string& project, const std::string& split, const EvalScores& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f", s.precision, s.recall, s.f1, s.auc);
  return project + "," + split + buf;
}

std::string percent_summary(const EvalScores& s) {
  auto pct = [](double v) { return std::to_string(static_cast<int>(std::lround(v * 100.0))); };
  return "precision " + pct(s.precision) + "% recall " + pct(s.recall) + "% F1 " + pct(s.f1) +
         "% AUC " + pct(s.auc) + "%";
}

}  // namespace ciskip
