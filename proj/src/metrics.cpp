// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "kec/error.hpp"

namespace kec {

void Confusion::add(bool predicted, bool actual) {
  if (predicted && actual) ++tp;
  else if (predicted) ++fp;
  else if (actual) ++fn;
  else ++tn;
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const std::uint64_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

MetricsReport report_from_confusion(const Confusion& c) {
  MetricsReport r;
  r.confusion = c;
  r.pos_f1 = f1_score(c.tp, c.fp, c.fn);
  // The negative class swaps roles: its false positives are our false negatives.
  r.neg_f1 = f1_score(c.tn, c.fn, c.fp);
  r.macro_f1 = (r.neg_f1 + r.pos_f1) / 2.0;
  return r;
}

Confusion confusion_from(std::span<const double> probs, std::span<const double> labels) {
  if (probs.size() != labels.size()) throw ShapeError("confusion: probs and labels differ in length");
  Confusion c;
  for (std::size_t k = 0; k < probs.size(); ++k) c.add(probs[k] > kDecisionThreshold, labels[k] > 0.5);
  return c;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

SeedSummary summarize(std::span<const MetricsReport> runs) {
  std::vector<double> n, p, m;
  for (const MetricsReport& r : runs) {
    n.push_back(r.neg_f1);
    p.push_back(r.pos_f1);
    m.push_back(r.macro_f1);
  }
  return {mean_std(n), mean_std(p), mean_std(m)};
}

std::string format_mean_std(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f)", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

}  // namespace kec
