#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "umgad/errors.hpp"

namespace umgad {

/// Area under the ROC curve via the rank statistic; tied scores get half credit.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw LengthMismatch("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;  // sum of 1-based midranks of positives
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) {
        rank_sum += midrank;
        ++pos;
      }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw SingleClass("auc needs both anomalous and normal labels");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

struct ClassReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class precision/recall/F1. A class absent from both predictions and
/// labels scores 1 on all three.
inline ClassReport class_report(std::span<const int> pred, std::span<const int> labels, int cls) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == cls, y = labels[i] == cls;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  if (tp + fp + fn == 0) return {1.0, 1.0, 1.0};
  ClassReport r;
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  return r;
}

inline double macro_f1(std::span<const int> pred, std::span<const int> labels) {
  if (pred.size() != labels.size()) throw LengthMismatch("macro_f1: prediction and label lengths differ");
  return 0.5 * (class_report(pred, labels, 0).f1 + class_report(pred, labels, 1).f1);
}

struct Metrics {
  double auc = 0.0;
  double macro_f1 = 0.0;
  ClassReport normal;
  ClassReport anomalous;
};

inline Metrics evaluate(std::span<const double> scores, std::span<const int> pred, std::span<const int> labels) {
  return Metrics{auc(scores, labels), macro_f1(pred, labels), class_report(pred, labels, 0), class_report(pred, labels, 1)};
}

}  // namespace umgad
