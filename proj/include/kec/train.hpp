// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kec/ad/checkpoint.hpp"
#include "kec/ad/gradcheck.hpp"
#include "kec/ad/optim.hpp"
#include "kec/config.hpp"
#include "kec/graph.hpp"
#include "kec/metrics.hpp"
#include "kec/model.hpp"

namespace kec {

// A conversation ready for the model: its graph and pair labels in
// enumerate_pairs order.
struct Example {
  KecGraph graph;
  std::vector<double> labels;
};

// Builds graphs with the config's windows and knowledge switches. Knowledge
// and lexicon are required (and coverage is checked) when use_csk is on.
std::vector<Example> prepare_examples(const Corpus& corpus, const KnowledgeStore* knowledge, const Lexicon* lexicon,
                                      const ModelConfig& config);

// Runs fn(k) for k in [0, n) on up to `threads` workers (static partition).
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// Eval-mode probabilities per example (aligned with Example::labels).
std::vector<std::vector<double>> predict(const KecModel& model, std::span<const Example> examples,
                                         std::size_t threads = 1);
MetricsReport evaluate(const KecModel& model, std::span<const Example> examples, std::size_t threads = 1);

// Summed BCE gradient of the given conversations, added into `sink` in
// conversation order. Returns the summed loss. streams[k] keys the dropout
// masks of examples[k]; train = false disables dropout.
double accumulate_gradients(const KecModel& model, std::span<const Example> examples,
                            std::span<const std::uint64_t> streams, bool train, std::size_t threads,
                            ad::GradientSet& sink);
double accumulate_gradients(const KecModel& model, std::span<const Example* const> examples,
                            std::span<const std::uint64_t> streams, bool train, std::size_t threads,
                            ad::GradientSet& sink);

// Dropout stream of one conversation visit; independent of batch layout.
std::uint64_t dropout_stream(std::uint64_t seed, int epoch, std::size_t example_index);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // summed BCE / pairs over the epoch
  std::size_t steps = 0;
  std::optional<MetricsReport> dev;
  std::optional<MetricsReport> train;  // only when early stopping is configured
  bool improved = false;
};

struct TrainResult {
  ad::Checkpoint best;  // best dev macro F1 (last epoch when there is no dev set)
  ad::Checkpoint last;
  int best_epoch = 0;
  std::optional<MetricsReport> best_dev;
  std::vector<EpochRecord> epochs;
  std::vector<std::string> log;  // one key=value line per epoch
};

std::string format_epoch(std::uint64_t seed, const EpochRecord& r);

// Trains one seed. Each optimizer step consumes batch_size * accumulation
// conversations; the step gradient is the sum of per-conversation gradients
// divided by the number of pairs in those conversations. Log lines are also
// written to `log` when given. Throws Error on a non-finite loss.
TrainResult train_model(const TrainConfig& config, std::uint64_t seed, std::span<const Example> train,
                        std::span<const Example> dev, std::ostream* log = nullptr,
                        const PrecomputedEmbeddings* embeddings = nullptr);

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult result;
  MetricsReport test;
};

struct Experiment {
  std::vector<SeedRun> runs;
  SeedSummary summary;  // over the test reports
};

// Trains every seed of the config and evaluates the selected checkpoint on test.
Experiment run_experiment(const TrainConfig& config, std::span<const Example> train, std::span<const Example> dev,
                          std::span<const Example> test, std::ostream* log = nullptr,
                          const PrecomputedEmbeddings* embeddings = nullptr);

// Small configuration for the end-to-end gradient check: d_u = 16, two
// layers, dropout off.
ModelConfig toy_model_config();
// Finite-difference check of the summed pair loss on the three-utterance toy
// conversation, with knowledge from its synthetic beams.
ad::GradCheckResult gradient_check_toy(const ModelConfig& config, std::uint64_t seed,
                                       const ad::GradCheckOptions& options = {});

}  // namespace kec
