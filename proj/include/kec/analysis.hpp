// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kec/config.hpp"
#include "kec/corpus.hpp"
#include "kec/knowledge.hpp"
#include "kec/metrics.hpp"
#include "kec/train.hpp"

namespace kec {

struct RecallBucket {
  std::size_t total = 0;
  std::size_t detected = 0;
  // Absent when the bucket is empty.
  std::optional<double> recall() const;
};

// Positive pairs bucketed by target emotion and by whether the source shares
// it (SE) or not (DE). Neutral targets never carry positives.
struct SeDeReport {
  struct Row {
    Emotion target = Emotion::Happiness;
    RecallBucket se;
    RecallBucket de;
  };
  std::vector<Row> rows;  // the six non-neutral emotions, inventory order
  std::size_t positives() const;
  std::size_t detected() const;
};

SeDeReport analyze_se_de(std::span<const Example> examples, const std::vector<std::vector<double>>& probs);
std::string format_se_de(const SeDeReport& report);

struct SweepRow {
  int window = 0;
  std::vector<double> dev_macro;  // best dev macro F1 per seed
  MeanStd summary;
};

// Trains each window size (w_c = w_k = w) with the config's seeds and reports
// the selected checkpoint's dev macro F1. Sizes must be >= 1 and distinct.
std::vector<SweepRow> sweep_window(const TrainConfig& config, std::span<const int> sizes, const Corpus& train,
                                   const Corpus& dev, const KnowledgeStore* knowledge, const Lexicon* lexicon,
                                   std::ostream* log = nullptr, const PrecomputedEmbeddings* embeddings = nullptr);
std::string format_sweep(const std::vector<SweepRow>& rows);

}  // namespace kec
