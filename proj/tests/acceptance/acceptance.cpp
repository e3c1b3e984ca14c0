// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

// One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include "fixtures.hpp"
#include "kec/ad/gradcheck.hpp"
#include "kec/ad/gru.hpp"
#include "kec/ad/ops.hpp"
#include "kec/metrics.hpp"
#include "kec/simd/kernels.hpp"
#include "kec/synth.hpp"
#include "kec/train.hpp"
#include "kec/util.hpp"
#include "oracles.hpp"

using namespace kec;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t worker_count() { return std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 4); }

// 1. Knowledge matrix against the brute-force trace.
Outcome algorithm1_oracle() {
  std::mt19937_64 rng(2026);
  std::size_t convs = 0, cells = 0, mismatches = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const fixtures::World w = fixtures::random_world(rng, n);
    for (int wk = 1; wk <= 3; ++wk)
      for (bool nk : {true, false}) {
        const KnowledgeMatrix m = build_knowledge_matrix(w.conv, w.store, w.lex, {wk, nk});
        const auto ref = oracle::algorithm1(w.conv, w.beams, w.lexmap, wk, nk);
        for (int i = 1; i <= n; ++i)
          for (int j = 1; j <= i; ++j, ++cells) {
            const auto& o = ref[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
            if (m.at(i, j).item != o.item || m.at(i, j).klg != o.klg) ++mismatches;
          }
      }
    ++convs;
  }
  return verdict(mismatches == 0, fmt("%zu conversations, %zu cells, %zu mismatches", convs, cells, mismatches));
}

// 2. Worked sentiment examples and the bucket partition.
Outcome sentiment_examples() {
  int failed = 0;
  Lexicon a;
  a.add("happy", {0.75, 0.0, 0.25});
  failed += score_knowledge("happy", a) != 0.75;
  failed += score_knowledge("table", a) != 0.0;
  Lexicon sym;
  sym.add("happy", {0.8, 0.0, 0.2});
  sym.add("sad", {0.0, 0.8, 0.2});
  failed += score_knowledge("happy sad", sym) != 0.0;

  Lexicon lex;
  lex.add("happy", {0.75, 0.0, 0.25});
  lex.add("glad", {0.75, 0.0, 0.25});
  lex.add("sad", {0.0, 0.75, 0.25});
  lex.add("upset", {0.0, 0.75, 0.25});
  lex.add("fine", {0.25, 0.25, 0.5});
  const KnowledgeBuckets neu = split_knowledge(std::vector<std::string>(5, "table"), lex);
  failed += !(neu.pos == "none" && neu.neg == "none" &&
              neu.neu == "table [sep] table [sep] table [sep] table [sep] table");
  const KnowledgeBuckets mixed = split_knowledge(std::vector<std::string>{"happy", "sad", "fine", "glad", "upset"}, lex);
  failed += !(mixed.pos == "happy [sep] glad" && mixed.neg == "sad [sep] upset" && mixed.neu == "fine");
  const KnowledgeBuckets dup = split_knowledge(std::vector<std::string>(5, "happy"), lex);
  failed += !(dup.pos == "happy [sep] happy [sep] happy [sep] happy [sep] happy" && dup.neg == "none" &&
              dup.neu == "none");

  std::mt19937_64 rng(7);
  std::size_t broken = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Lexicon l;
    oracle::LexMap map;
    fixtures::random_lexicon(rng, l, map);
    std::vector<std::string> beams;
    for (int b = 0; b < 5; ++b) beams.push_back(fixtures::random_text(rng, 1, 3));
    const KnowledgeBuckets k = split_knowledge(beams, l);
    std::vector<std::string> seen;
    for (const std::string* bucket : {&k.pos, &k.neg, &k.neu}) {
      if (*bucket == "none") continue;
      std::string_view rest = *bucket;
      for (;;) {
        const auto at = rest.find(kSeparator);
        seen.emplace_back(rest.substr(0, at));
        if (at == std::string_view::npos) break;
        rest.remove_prefix(at + kSeparator.size());
      }
    }
    std::sort(beams.begin(), beams.end());
    std::sort(seen.begin(), seen.end());
    broken += seen != beams;
  }
  return verdict(failed == 0 && broken == 0,
                 fmt("6 worked examples, %d failed; 1000 random beam sets, %zu partition violations", failed, broken));
}

// 3. End-to-end and per-primitive finite-difference checks.
Outcome gradient_fidelity() {
  double e2e = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) e2e = std::max(e2e, gradient_check_toy(toy_model_config(), seed).max_rel_error);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  ad::ParamStore s;
  auto fill = [&](const std::string& name, ad::Shape shape, double lo, double hi) -> ad::Parameter& {
    ad::Parameter& p = s.add(name, shape);
    std::uniform_real_distribution<double> r(lo, hi);
    for (double& x : p.value()) x = r(rng);
    return p;
  };
  ad::Parameter& a = fill("a", {3, 4}, -1, 1);
  ad::Parameter& b = fill("b", {4, 2}, -1, 1);
  ad::Parameter& bias = fill("bias", {1, 4}, -1, 1);
  ad::Parameter& col = fill("col", {5, 1}, -2, 2);
  ad::Parameter& pr = fill("p", {2, 3}, 0.1, 0.9);
  ad::Parameter& x = fill("x", {1, 4}, -1, 1);
  ad::Parameter& h = fill("h", {1, 4}, -1, 1);
  const ad::GruParams g = ad::add_gru_params(s, "g", 4, 4);
  for (const std::string n : {"g.w_ih", "g.w_hh", "g.b_ih", "g.b_hh"})
    for (double& v : s.get(n).value()) v = u(rng);
  const std::vector<double> labels{1, 0, 1, 0, 0, 1};
  auto contract = [](ad::Tensor y, std::uint64_t seed) {
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> c(-1, 1);
    std::vector<double> w(y.shape().size());
    for (double& v : w) v = c(r);
    return ad::sum(ad::mul(y, y.tape().constant(y.shape(), w)));
  };
  using F = std::function<ad::Tensor(ad::Tape&)>;
  const std::vector<F> prims{
      [&](ad::Tape& t) { return contract(ad::matmul(t.param(a), t.param(b)), 1); },
      [&](ad::Tape& t) { return contract(ad::add_bias(t.param(a), t.param(bias)), 2); },
      [&](ad::Tape& t) { return contract(ad::mul(t.param(a), t.param(a)), 3); },
      [&](ad::Tape& t) { return contract(ad::sigmoid(t.param(a)), 4); },
      [&](ad::Tape& t) { return contract(ad::tanh(t.param(a)), 5); },
      [&](ad::Tape& t) { return contract(ad::relu(t.param(a)), 6); },
      [&](ad::Tape& t) {
        const ad::Tensor parts[] = {t.param(x), t.param(h)};
        return contract(ad::concat_cols(parts), 7);
      },
      [&](ad::Tape& t) {
        const ad::Tensor parts[] = {t.param(a), t.param(bias)};
        return contract(ad::stack_rows(parts), 8);
      },
      [&](ad::Tape& t) { return contract(ad::maxpool_rows(t.param(a)), 9); },
      [&](ad::Tape& t) { return contract(ad::masked_softmax(t.param(col), 4), 10); },
      [&](ad::Tape& t) { return ad::bce_sum(t.param(pr), labels); },
      [&](ad::Tape& t) { return contract(ad::gru_cell(t.param(x), t.param(h), g), 11); },
      [&](ad::Tape& t) { return contract(ad::dropout(t.param(a), 0.3, true, 5), 12); },
  };
  ad::GradCheckOptions o;
  o.eps = 1e-5;
  o.max_entries_per_param = 1000;
  double prim = 0.0;
  for (const F& f : prims) prim = std::max(prim, ad::grad_check(s, f, o).max_rel_error);
  return verdict(e2e < 1e-4 && prim < 1e-6,
                 fmt("end-to-end max rel error %.2e (< 1e-4), %zu primitives max %.2e (< 1e-6)", e2e, prims.size(),
                     prim));
}

// 4. Attention rows sum to one; future edits leave earlier pairs unchanged.
Outcome attention_and_causality() {
  std::mt19937_64 rng(44);
  ModelConfig c = toy_model_config();
  double worst = 0.0;
  std::size_t changed = 0, compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 6;
    const fixtures::World w = fixtures::random_world(rng, n);
    GraphOptions go;
    go.context_window = 1 + trial % 3;
    go.knowledge.window = 1 + (trial / 3) % 3;
    KecModel m(c);
    m.initialize(static_cast<std::uint64_t>(trial));
    ad::Tape t1(false);
    const ForwardResult r = m.forward(t1, build_graph(w.conv, &w.store, &w.lex, go), {false, 0, true});
    for (const auto& layer : r.attention)
      for (const AttentionRow& row : layer) {
        if (row.weights.empty()) continue;
        double s = 0.0;
        for (double a : row.weights) s += a;
        worst = std::max(worst, std::abs(s - 1.0));
      }
    const std::vector<double> base(r.probs.value().begin(), r.probs.value().end());

    const int cut = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
    const fixtures::World other = fixtures::random_world(rng, n);
    fixtures::World edited;
    edited.conv = w.conv;
    edited.lex = w.lex;
    for (int k = 1; k <= n; ++k) {
      Utterance& utt = edited.conv.utterances[static_cast<std::size_t>(k - 1)];
      if (k >= cut) {
        utt.tokens = other.conv.at(k).tokens;
        utt.speaker = other.conv.at(k).speaker;
        utt.emotion = other.conv.at(k).emotion;
      }
      for (CskRelation rel : kAllRelations)
        edited.store.add(utt.id, rel, k < cut ? w.store.beams(utt.id, rel) : other.store.beams(other.conv.at(k).id, rel));
    }
    ad::Tape t2(false);
    const ForwardResult r2 = m.forward(t2, build_graph(edited.conv, &edited.store, &edited.lex, go));
    const auto moved = r2.probs.value();
    for (std::size_t p = 0; p < r2.pairs.size(); ++p)
      if (r2.pairs[p].target_index < cut) {
        ++compared;
        changed += moved[p] != base[p];
      }
  }
  return verdict(worst <= 1e-9 && changed == 0 && compared > 0,
                 fmt("50 graphs: max |sum alpha - 1| = %.1e; %zu earlier pairs compared, %zu changed", worst, compared,
                     changed));
}

TrainConfig desk_config(std::size_t d_u, std::size_t mlp, std::size_t batch, double wd) {
  TrainConfig c;
  c.model.d_u = d_u;
  c.model.d_e = 32;
  c.model.layers = 2;
  c.model.mlp_hidden = mlp;
  c.lr = 3e-3;
  c.weight_decay = wd;
  c.batch_size = batch;
  c.accumulation = 1;
  c.threads = worker_count();
  return c;
}

// 5. Memorize eight planted-signal conversations.
Outcome overfit() {
  SynthOptions so;
  so.conversations = 8;
  so.seed = 11;
  const SynthData data = synth_corpus(so);
  const Lexicon lex = synth_lexicon();
  TrainConfig c = desk_config(64, 64, 2, 0.0);
  c.epochs = 200;
  c.stop_at_train_pos_f1 = 1.0;
  const auto ex = prepare_examples(data.corpus, &data.knowledge, &lex, c.model);
  const TrainResult r = train_model(c, 1, ex, {});
  const EpochRecord& last = r.epochs.back();
  const double f1 = last.train ? last.train->pos_f1 : 0.0;
  return verdict(f1 == 1.0, fmt("train pos F1 %.4f after %d epochs (d_u = 64)", f1, last.epoch));
}

// 6. Knowledge ablation on a corpus whose causal evidence lives only in knowledge.
Outcome knowledge_ablation() {
  SynthOptions so;
  so.conversations = 200;
  so.seed = 2026;
  const SynthData data = synth_corpus(so);
  const Lexicon lex = synth_lexicon();
  const Corpus train(data.corpus.begin(), data.corpus.begin() + 140);
  const Corpus dev(data.corpus.begin() + 140, data.corpus.begin() + 160);
  const Corpus test(data.corpus.begin() + 160, data.corpus.end());
  TrainConfig full = desk_config(32, 64, 4, 1e-4);
  full.epochs = 20;
  full.seeds = {1, 2, 3, 4, 5};
  TrainConfig ablated = full;
  ablated.model.use_csk = false;
  auto run = [&](const TrainConfig& c) {
    const auto tr = prepare_examples(train, &data.knowledge, &lex, c.model);
    const auto dv = prepare_examples(dev, &data.knowledge, &lex, c.model);
    const auto te = prepare_examples(test, &data.knowledge, &lex, c.model);
    return run_experiment(c, tr, dv, te).summary.pos_f1;
  };
  const MeanStd a = run(full);
  const MeanStd b = run(ablated);
  return verdict(a.mean - b.mean >= 0.15, fmt("test pos F1 full %.4f (%.4f) vs no-csk %.4f (%.4f), gap %.4f (>= 0.15)",
                                              a.mean, a.std, b.mean, b.std, a.mean - b.mean));
}

// 7. F1 against exact rational arithmetic on random confusions.
Outcome metric_correctness() {
  std::mt19937_64 rng(77);
  int bad = 0;
  for (int k = 0; k < 20; ++k) {
    const Confusion c{rng() % 40, rng() % 40, rng() % 40, rng() % 400};
    const MetricsReport r = report_from_confusion(c);
    bad += r.pos_f1 != oracle::f1_exact(c.tp, c.fp, c.fn);
    bad += r.neg_f1 != oracle::f1_exact(c.tn, c.fn, c.fp);
    bad += r.macro_f1 != (r.neg_f1 + r.pos_f1) / 2;
  }
  return verdict(bad == 0, fmt("20 confusion fixtures, %d mismatches", bad));
}

// 8. Published RECCON-DD split statistics on a user-supplied copy.
Outcome corpus_statistics() {
  const char* dir = std::getenv("KEC_RECCON_DIR");
  if (!dir) return {Outcome::Skip, "KEC_RECCON_DIR not set; RECCON-DD is not bundled"};
  const std::filesystem::path root(dir);
  struct Expect {
    const char* split;
    std::size_t pos, neg, dialogues, utterances;
    long avg;
  };
  const Expect table[] = {{"train", 7027, 45392, 834, 8206, 14}, {"dev", 328, 2842, 47, 493, 16},
                          {"test", 1767, 14052, 225, 2405, 15}};
  std::string detail;
  bool ok = true;
  for (const Expect& e : table) {
    const std::filesystem::path p = root / (std::string(e.split) + ".jsonl");
    if (!std::filesystem::exists(p)) return {Outcome::Skip, "missing " + p.string()};
    const StatsReport s = compute_stats(load_corpus(p));
    const bool match = s.positive_pairs == e.pos && s.negative_pairs == e.neg && s.dialogues == e.dialogues &&
                       s.utterances == e.utterances && s.avg_utterance_length == e.avg;
    ok = ok && match;
    detail += fmt("%s %zu/%zu/%zu/%zu/%ld %s; ", e.split, s.positive_pairs, s.negative_pairs, s.dialogues,
                  s.utterances, s.avg_utterance_length, match ? "ok" : "MISMATCH");
  }
  return verdict(ok, detail);
}

// 9. Accumulation equivalence and seed determinism.
Outcome accumulation_and_determinism() {
  SynthOptions so;
  so.conversations = 8;
  so.seed = 9;
  const SynthData data = synth_corpus(so);
  const Lexicon lex = synth_lexicon();
  TrainConfig c = desk_config(16, 16, 4, 1e-4);
  c.model.d_e = 8;
  c.epochs = 1;
  const auto ex = prepare_examples(data.corpus, &data.knowledge, &lex, c.model);
  TrainConfig split = c, whole = c;
  split.batch_size = 4;
  split.accumulation = 2;
  whole.batch_size = 8;
  whole.accumulation = 1;
  const TrainResult a = train_model(split, 3, ex, {});
  const TrainResult b = train_model(whole, 3, ex, {});
  double worst = 0.0;
  for (std::size_t k = 0; k < a.last.params.size(); ++k)
    for (std::size_t e = 0; e < a.last.params[k].values.size(); ++e)
      worst = std::max(worst, std::abs(a.last.params[k].values[e] - b.last.params[k].values[e]));
  c.epochs = 3;
  const auto log1 = train_model(c, 4, ex, ex).log;
  const auto log2 = train_model(c, 4, ex, ex).log;
  return verdict(worst <= 1e-12 && log1 == log2 && a.epochs[0].steps == 1,
                 fmt("one step (4 x 2) vs (8 x 1): max |diff| %.1e (<= 1e-12); repeated-seed logs %s", worst,
                     log1 == log2 ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "knowledge-matrix-oracle", algorithm1_oracle},
      {2, "sentiment-examples", sentiment_examples},
      {3, "gradient-fidelity", gradient_fidelity},
      {4, "attention-and-causality", attention_and_causality},
      {5, "overfit", overfit},
      {6, "knowledge-ablation", knowledge_ablation},
      {7, "metric-correctness", metric_correctness},
      {8, "corpus-statistics", corpus_statistics},
      {9, "accumulation-and-determinism", accumulation_and_determinism},
  };
  std::printf("backend=%s\n", std::string(simd::backend_name(simd::active_backend())).c_str());
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.kind == Outcome::Pass ? "PASS" : (o.kind == Outcome::Skip ? "SKIP" : "FAIL");
    failures += o.kind == Outcome::Fail;
    std::printf("[%s] %d %s: %s (%.2f s)\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
