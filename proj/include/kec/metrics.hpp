// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kec {

inline constexpr double kDecisionThreshold = 0.5;  // predict 1 iff p > 0.5

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  void add(bool predicted, bool actual);
  Confusion& operator+=(const Confusion& o);
  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

// 2TP / (2TP + FP + FN); 0 when the denominator is 0.
double f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

struct MetricsReport {
  double neg_f1 = 0.0;
  double pos_f1 = 0.0;
  double macro_f1 = 0.0;
  Confusion confusion;
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport report_from_confusion(const Confusion& c);
// probs and labels aligned; labels are 0 or 1.
Confusion confusion_from(std::span<const double> probs, std::span<const double> labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single run
};
MeanStd mean_std(std::span<const double> values);

struct SeedSummary {
  MeanStd neg_f1, pos_f1, macro_f1;
};
SeedSummary summarize(std::span<const MetricsReport> runs);
// Percent with the deviation in parentheses, e.g. "66.76 (0.33)".
std::string format_mean_std(const MeanStd& m);

}  // namespace kec
