// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "kec/ad/ops.hpp"
#include "kec/error.hpp"
#include "kec/synth.hpp"
#include "kec/util.hpp"

namespace kec {

std::vector<Example> prepare_examples(const Corpus& corpus, const KnowledgeStore* knowledge, const Lexicon* lexicon,
                                      const ModelConfig& config) {
  GraphOptions go;
  go.context_window = config.context_window;
  go.knowledge.window = config.knowledge_window;
  go.knowledge.neutral_knowledge = config.use_neutral_knowledge;
  go.use_knowledge = config.use_csk;
  if (config.use_csk) {
    if (!knowledge || !lexicon) throw ValidationError("knowledge and lexicon files are required unless CSK is off");
    knowledge->check_coverage(corpus);
  }
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const Conversation& conv : corpus) {
    Example ex;
    ex.graph = build_graph(conv, knowledge, lexicon, go);
    for (const PairLabel& p : enumerate_pairs(conv)) ex.labels.push_back(p.label);
    out.push_back(std::move(ex));
  }
  return out;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < n; k += threads) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::vector<double>> predict(const KecModel& model, std::span<const Example> examples,
                                         std::size_t threads) {
  std::vector<std::vector<double>> out(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t k) {
    ad::Tape tape(false);
    const ForwardResult r = model.forward(tape, examples[k].graph);
    auto v = r.probs.value();
    out[k].assign(v.begin(), v.end());
  });
  return out;
}

MetricsReport evaluate(const KecModel& model, std::span<const Example> examples, std::size_t threads) {
  const auto probs = predict(model, examples, threads);
  Confusion c;
  for (std::size_t k = 0; k < examples.size(); ++k) c += confusion_from(probs[k], examples[k].labels);
  return report_from_confusion(c);
}

namespace {

double conversation_gradient(const KecModel& model, const Example& ex, std::uint64_t stream, bool train,
                             ad::GradientSet& sink) {
  ad::Tape tape;
  const ForwardResult r = model.forward(tape, ex.graph, {train, stream, false});
  const ad::Tensor loss = pair_loss(r.probs, ex.labels);
  const double value = loss.item();
  if (!std::isfinite(value))
    throw Error("non-finite loss " + std::to_string(value) + " on conversation '" + ex.graph.conv_id() + "'");
  tape.backward(loss);
  tape.accumulate_into(sink);
  return value;
}

}  // namespace

double accumulate_gradients(const KecModel& model, std::span<const Example* const> examples,
                            std::span<const std::uint64_t> streams, bool train, std::size_t threads,
                            ad::GradientSet& sink) {
  if (streams.size() != examples.size()) throw ShapeError("accumulate_gradients: one stream per example required");
  double total = 0.0;
  if (threads <= 1 || examples.size() <= 1) {
    for (std::size_t k = 0; k < examples.size(); ++k)
      total += conversation_gradient(model, *examples[k], streams[k], train, sink);
    return total;
  }
  // Per-conversation buffers merged in order keep the sum independent of scheduling.
  std::vector<ad::GradientSet> parts(examples.size(), ad::GradientSet(model.params()));
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t k) {
    losses[k] = conversation_gradient(model, *examples[k], streams[k], train, parts[k]);
  });
  for (std::size_t k = 0; k < examples.size(); ++k) {
    sink.add(parts[k]);
    total += losses[k];
  }
  return total;
}

double accumulate_gradients(const KecModel& model, std::span<const Example> examples,
                            std::span<const std::uint64_t> streams, bool train, std::size_t threads,
                            ad::GradientSet& sink) {
  std::vector<const Example*> ptrs;
  for (const Example& e : examples) ptrs.push_back(&e);
  return accumulate_gradients(model, ptrs, streams, train, threads, sink);
}

std::uint64_t dropout_stream(std::uint64_t seed, int epoch, std::size_t example_index) {
  return splitmix64(splitmix64(seed ^ 0xd00dULL) ^ splitmix64((static_cast<std::uint64_t>(epoch) << 32) ^ example_index));
}

std::string format_epoch(std::uint64_t seed, const EpochRecord& r) {
  char buf[512];
  int n = std::snprintf(buf, sizeof buf, "seed=%llu epoch=%d loss=%.10g steps=%zu", static_cast<unsigned long long>(seed),
                        r.epoch, r.train_loss, r.steps);
  std::string s(buf, static_cast<std::size_t>(n));
  if (r.train) {
    std::snprintf(buf, sizeof buf, " train_pos_f1=%.6f", r.train->pos_f1);
    s += buf;
  }
  if (r.dev) {
    std::snprintf(buf, sizeof buf, " dev_neg_f1=%.6f dev_pos_f1=%.6f dev_macro_f1=%.6f", r.dev->neg_f1, r.dev->pos_f1,
                  r.dev->macro_f1);
    s += buf;
  }
  s += r.improved ? " best=1" : " best=0";
  return s;
}

TrainResult train_model(const TrainConfig& config, std::uint64_t seed, std::span<const Example> train,
                        std::span<const Example> dev, std::ostream* log, const PrecomputedEmbeddings* embeddings) {
  config.validate();
  KecModel model(config.model, embeddings);
  model.initialize(config.model.init_seed ? config.model.init_seed : seed);
  ad::AdamW opt(model.params(), {config.lr, 0.9, 0.999, 1e-8, config.weight_decay});
  const std::string cfg_text = train_config_text(config);

  TrainResult res;
  res.best = ad::make_checkpoint(cfg_text, model.params(), &opt);
  double best_macro = -std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(splitmix64(seed ^ 0x5eedULL));
  const std::size_t effective = config.batch_size * config.accumulation;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t pair_total = 0;
    for (std::size_t start = 0; start < order.size(); start += effective) {
      const std::size_t end = std::min(order.size(), start + effective);
      ad::GradientSet grads(model.params());
      std::size_t pairs = 0;
      // Micro-batches of batch_size conversations accumulate into one step.
      for (std::size_t mb = start; mb < end; mb += config.batch_size) {
        const std::size_t mb_end = std::min(end, mb + config.batch_size);
        std::vector<const Example*> batch;
        std::vector<std::uint64_t> streams;
        for (std::size_t k = mb; k < mb_end; ++k) {
          batch.push_back(&train[order[k]]);
          streams.push_back(dropout_stream(seed, epoch, order[k]));
          pairs += train[order[k]].labels.size();
        }
        loss_sum += accumulate_gradients(model, batch, streams, true, config.threads, grads);
      }
      grads.scale(1.0 / static_cast<double>(pairs));
      opt.step(model.params(), grads);
      pair_total += pairs;
      ++rec.steps;
    }
    rec.train_loss = pair_total ? loss_sum / static_cast<double>(pair_total) : 0.0;
    if (!dev.empty()) rec.dev = evaluate(model, dev, config.threads);
    if (config.stop_at_train_pos_f1 > 0.0) rec.train = evaluate(model, train, config.threads);
    const double macro = rec.dev ? rec.dev->macro_f1 : static_cast<double>(epoch);
    if (macro > best_macro) {
      best_macro = macro;
      rec.improved = true;
      res.best = ad::make_checkpoint(cfg_text, model.params(), &opt);
      res.best_epoch = epoch;
      res.best_dev = rec.dev;
    }
    res.log.push_back(format_epoch(seed, rec));
    if (log) *log << res.log.back() << '\n' << std::flush;
    res.epochs.push_back(rec);
    if (rec.train && rec.train->pos_f1 >= config.stop_at_train_pos_f1) break;
  }
  res.last = ad::make_checkpoint(cfg_text, model.params(), &opt);
  return res;
}

Experiment run_experiment(const TrainConfig& config, std::span<const Example> train, std::span<const Example> dev,
                          std::span<const Example> test, std::ostream* log, const PrecomputedEmbeddings* embeddings) {
  Experiment ex;
  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : config.seeds) {
    SeedRun run;
    run.seed = seed;
    run.result = train_model(config, seed, train, dev, log, embeddings);
    KecModel model(config.model, embeddings);
    model.load(run.result.best);
    run.test = evaluate(model, test, config.threads);
    reports.push_back(run.test);
    ex.runs.push_back(std::move(run));
  }
  ex.summary = summarize(reports);
  return ex;
}

ModelConfig toy_model_config() {
  ModelConfig c;
  c.d_u = 16;
  c.d_e = 8;
  c.layers = 2;
  c.mlp_hidden = 16;
  c.dropout = 0.0;
  c.encoder_buckets = 256;
  c.encoder_dim = 16;
  return c;
}

ad::GradCheckResult gradient_check_toy(const ModelConfig& config, std::uint64_t seed,
                                       const ad::GradCheckOptions& options) {
  const SynthData toy = toy_corpus(seed);
  const Lexicon lex = synth_lexicon();
  const auto examples = prepare_examples(toy.corpus, &toy.knowledge, &lex, config);
  KecModel model(config);
  model.initialize(seed);
  const Example& ex = examples.front();
  return ad::grad_check(model.params(), [&](ad::Tape& tape) {
    return pair_loss(model.forward(tape, ex.graph).probs, ex.labels);
  }, options);
}

}  // namespace kec
