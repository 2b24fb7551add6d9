/*
 * Threshold-free detection metrics: AUC via midranks, fixed-threshold
 * accuracy, detection probability at a false-alarm budget, ROC curves.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"

namespace ganbench {

/// Detector outputs split by ground truth; higher scores mean "fake".
struct ScoreSet {
  std::vector<double> positives;  // scores of fake (label 1) samples
  std::vector<double> negatives;  // scores of real (label 0) samples

  void require_both_classes(const char* who) const {
    if (positives.empty() || negatives.empty())
      throw DegenerateData(std::string(who) + ": need at least one score per class");
  }
};

/// Mann-Whitney AUC with midrank tie handling. Equals the fraction of
/// (positive, negative) pairs ranked correctly, ties counting 1/2.
inline double auc(const ScoreSet& s) {
  s.require_both_classes("auc");
  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(s.positives.size() + s.negatives.size());
  for (double v : s.positives) all.push_back({v, true});
  for (double v : s.negatives) all.push_back({v, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      if (all[j].positive) ++pos_in_group;
      ++j;
    }
    // 1-based ranks i+1 .. j share the midrank (i+1+j)/2.
    const double midrank = (static_cast<double>(i) + 1.0 + static_cast<double>(j)) / 2.0;
    rank_sum_pos += midrank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double np = static_cast<double>(s.positives.size());
  const double nn = static_cast<double>(s.negatives.size());
  const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

/// Accuracy when predicting "fake" iff score > threshold; ties with the
/// threshold predict "real".
inline double accuracy_at(const ScoreSet& s, double threshold) {
  s.require_both_classes("accuracy_at");
  std::size_t correct = 0;
  for (double v : s.positives)
    if (v > threshold) ++correct;
  for (double v : s.negatives)
    if (!(v > threshold)) ++correct;
  return static_cast<double>(correct) /
         static_cast<double>(s.positives.size() + s.negatives.size());
}

/// Detection probability at a false-alarm ceiling. The threshold is the
/// smallest negative score whose empirical false-alarm rate (strictly
/// greater scores) does not exceed `far`, so the realized rate never
/// overshoots the budget. Warns on stderr when the negative sample is too
/// small to resolve `far`.
inline double pd_at_far(const ScoreSet& s, double far) {
  s.require_both_classes("pd_at_far");
  if (!(far > 0.0 && far < 1.0))
    throw InvalidInput("pd_at_far: rate must lie strictly between 0 and 1");
  const std::size_t nn = s.negatives.size();
  if (static_cast<double>(nn) * far < 1.0)
    std::fprintf(stderr,
                 "warning: pd_at_far with %zu negatives cannot resolve a %g "
                 "false-alarm rate; threshold degenerates to the maximum\n",
                 nn, far);
  std::vector<double> neg = s.negatives;
  std::sort(neg.begin(), neg.end());
  // Scanning ascending, the first value v with #{neg > v} <= far * nn.
  double threshold = neg.back();
  for (std::size_t i = 0; i < nn; ++i) {
    const double v = neg[i];
    const auto strictly_greater = static_cast<std::size_t>(
        neg.end() - std::upper_bound(neg.begin() + static_cast<std::ptrdiff_t>(i),
                                     neg.end(), v));
    if (static_cast<double>(strictly_greater) <= far * static_cast<double>(nn)) {
      threshold = v;
      break;
    }
  }
  std::size_t detected = 0;
  for (double v : s.positives)
    if (v > threshold) ++detected;
  return static_cast<double>(detected) / static_cast<double>(s.positives.size());
}

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC points for thresholds +inf, every distinct score descending, -inf.
/// Predictions follow accuracy_at: positive iff score > threshold. The
/// first point is (0,0) and the last (1,1); fpr and tpr are non-decreasing.
inline std::vector<RocPoint> roc_curve(const ScoreSet& s) {
  s.require_both_classes("roc_curve");
  std::vector<double> thresholds;
  thresholds.reserve(s.positives.size() + s.negatives.size());
  thresholds.insert(thresholds.end(), s.positives.begin(), s.positives.end());
  thresholds.insert(thresholds.end(), s.negatives.begin(), s.negatives.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<double> pos = s.positives, neg = s.negatives;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  const auto count_above = [](const std::vector<double>& sorted, double t) {
    return static_cast<double>(sorted.end() -
                               std::upper_bound(sorted.begin(), sorted.end(), t));
  };

  std::vector<RocPoint> curve;
  curve.reserve(thresholds.size() + 2);
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (double t : thresholds)
    curve.push_back({t, count_above(neg, t) / nn, count_above(pos, t) / np});
  curve.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
  return curve;
}

/// Area under an ROC polyline by the trapezoid rule.
inline double roc_area(const std::vector<RocPoint>& curve) {
  if (curve.size() < 2) throw InvalidInput("roc_area: need at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  return area;
}

inline void write_roc_csv(const std::string& path, const std::vector<RocPoint>& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open roc csv for writing: " + path);
  out << "threshold,fpr,tpr\n";
  char buf[128];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
    out << buf;
  }
  if (!out) throw IoError("failed while writing roc csv: " + path);
}

/// The summary line reported for every detector/perturbation cell.
struct MetricSummary {
  double auc = 0.0;
  double acc_at_half = 0.0;
  double pd_at_5 = 0.0;
  double pd_at_1 = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

inline MetricSummary summarize(const ScoreSet& s) {
  MetricSummary m;
  m.auc = auc(s);
  m.acc_at_half = accuracy_at(s, 0.5);
  m.pd_at_5 = pd_at_far(s, 0.05);
  m.pd_at_1 = pd_at_far(s, 0.01);
  m.n_pos = s.positives.size();
  m.n_neg = s.negatives.size();
  return m;
}

}  // namespace ganbench
