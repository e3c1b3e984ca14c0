// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/analysis.hpp"

#include <cstdio>
#include <set>

#include "kec/error.hpp"

namespace kec {

std::optional<double> RecallBucket::recall() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(detected) / static_cast<double>(total);
}

std::size_t SeDeReport::positives() const {
  std::size_t n = 0;
  for (const Row& r : rows) n += r.se.total + r.de.total;
  return n;
}

std::size_t SeDeReport::detected() const {
  std::size_t n = 0;
  for (const Row& r : rows) n += r.se.detected + r.de.detected;
  return n;
}

SeDeReport analyze_se_de(std::span<const Example> examples, const std::vector<std::vector<double>>& probs) {
  if (probs.size() != examples.size()) throw ShapeError("analyze_se_de: one probability list per example required");
  SeDeReport rep;
  for (Emotion e : kAllEmotions)
    if (e != Emotion::Neutral) rep.rows.push_back({e, {}, {}});
  for (std::size_t k = 0; k < examples.size(); ++k) {
    const Example& ex = examples[k];
    if (probs[k].size() != ex.labels.size()) throw ShapeError("analyze_se_de: probability count mismatch");
    std::size_t p = 0;
    for (int i = 1; i <= ex.graph.size(); ++i)
      for (int j = 1; j <= i; ++j, ++p) {
        if (ex.labels[p] < 0.5) continue;
        const Emotion target = ex.graph.node(i).emotion;
        for (SeDeReport::Row& row : rep.rows) {
          if (row.target != target) continue;
          RecallBucket& b = ex.graph.node(j).emotion == target ? row.se : row.de;
          ++b.total;
          if (probs[k][p] > kDecisionThreshold) ++b.detected;
        }
      }
  }
  return rep;
}

std::string format_se_de(const SeDeReport& report) {
  std::string out = "emotion     se_total se_detected se_recall de_total de_detected de_recall\n";
  char buf[160];
  auto rec = [](const RecallBucket& b) {
    char r[16];
    if (auto v = b.recall()) std::snprintf(r, sizeof r, "%.4f", *v);
    else std::snprintf(r, sizeof r, "-");
    return std::string(r);
  };
  for (const SeDeReport::Row& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%-11s %8zu %11zu %9s %8zu %11zu %9s\n", std::string(to_string(row.target)).c_str(),
                  row.se.total, row.se.detected, rec(row.se).c_str(), row.de.total, row.de.detected,
                  rec(row.de).c_str());
    out += buf;
  }
  return out;
}

std::vector<SweepRow> sweep_window(const TrainConfig& config, std::span<const int> sizes, const Corpus& train,
                                   const Corpus& dev, const KnowledgeStore* knowledge, const Lexicon* lexicon,
                                   std::ostream* log, const PrecomputedEmbeddings* embeddings) {
  std::set<int> seen;
  for (int w : sizes) {
    if (w < 1) throw ValidationError("window sizes must be >= 1");
    if (!seen.insert(w).second) throw ValidationError("duplicate window size " + std::to_string(w));
  }
  std::vector<SweepRow> rows;
  for (int w : sizes) {
    TrainConfig c = config;
    c.model.context_window = w;
    c.model.knowledge_window = w;
    const auto tr = prepare_examples(train, knowledge, lexicon, c.model);
    const auto dv = prepare_examples(dev, knowledge, lexicon, c.model);
    SweepRow row;
    row.window = w;
    for (std::uint64_t seed : c.seeds) {
      const TrainResult r = train_model(c, seed, tr, dv, log, embeddings);
      row.dev_macro.push_back(r.best_dev ? r.best_dev->macro_f1 : 0.0);
    }
    row.summary = mean_std(row.dev_macro);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep(const std::vector<SweepRow>& rows) {
  std::string out = "window dev_macro_f1_mean dev_macro_f1_std runs\n";
  char buf[96];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%6d %17.6f %16.6f %4zu\n", r.window, r.summary.mean, r.summary.std,
                  r.dev_macro.size());
    out += buf;
  }
  return out;
}

}  // namespace kec
