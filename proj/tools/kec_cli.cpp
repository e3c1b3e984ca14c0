// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "kec/ad/checkpoint.hpp"
#include "kec/analysis.hpp"
#include "kec/config.hpp"
#include "kec/corpus.hpp"
#include "kec/encoder.hpp"
#include "kec/error.hpp"
#include "kec/graph.hpp"
#include "kec/knowledge.hpp"
#include "kec/metrics.hpp"
#include "kec/model.hpp"
#include "kec/sentiment.hpp"
#include "kec/simd/kernels.hpp"
#include "kec/synth.hpp"
#include "kec/train.hpp"
#include "kec/util.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Inputs shared by the subcommands; each registers only what it uses.
struct Inputs {
  std::string corpus, dev, test, knowledge, lexicon, embeddings, config, out, checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<int> window_context, window_knowledge;
  bool no_csk = false, no_emotion_emb = false, no_gru_k = false, no_gru_s = false;
  bool no_neutral_knowledge = false, direct_add = false;
  std::vector<std::string> sets;
  std::size_t threads = 1;
};

void add_data_flags(CLI::App* cmd, Inputs& in, bool corpus_required = true) {
  auto* c = cmd->add_option("--corpus", in.corpus, "Corpus JSONL file")->check(CLI::ExistingFile);
  if (corpus_required) c->required();
  cmd->add_option("--knowledge", in.knowledge, "Knowledge beams JSONL file")->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", in.lexicon, "Sentiment lexicon TSV file")->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", in.embeddings, "Precomputed embeddings JSONL file")->check(CLI::ExistingFile);
}

void add_model_flags(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--config", in.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", in.sets, "Override a config entry (key=value), repeatable");
  cmd->add_option("--seed", in.seed, "Run this seed only");
  cmd->add_option("--window-context", in.window_context, "Context window w_c")->check(CLI::PositiveNumber);
  cmd->add_option("--window-knowledge", in.window_knowledge, "Knowledge window w_k")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-csk", in.no_csk, "Drop commonsense knowledge");
  cmd->add_flag("--no-emotion-emb", in.no_emotion_emb, "Drop emotion embeddings");
  cmd->add_flag("--no-gru-k", in.no_gru_k, "Drop the contextual-knowledge GRU");
  cmd->add_flag("--no-gru-s", in.no_gru_s, "Drop the self-loop-knowledge GRU");
  cmd->add_flag("--no-neutral-knowledge", in.no_neutral_knowledge, "Do not prefix neutral knowledge");
  cmd->add_flag("--direct-add", in.direct_add, "Add knowledge directly to neighbor states");
  cmd->add_option("--threads", in.threads, "Worker threads")->check(CLI::PositiveNumber);
}

kec::TrainConfig build_config(const Inputs& in, kec::TrainConfig base = {}) {
  kec::TrainConfig c = in.config.empty() ? std::move(base) : kec::load_config(in.config);
  for (const std::string& s : in.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw kec::ValidationError("--set expects key=value, got '" + s + "'");
    kec::apply_config_entry(c, kec::trim(s.substr(0, eq)), s.substr(eq + 1));
  }
  if (in.seed) c.seeds = {*in.seed};
  if (in.window_context) c.model.context_window = *in.window_context;
  if (in.window_knowledge) c.model.knowledge_window = *in.window_knowledge;
  if (in.no_csk) c.model.use_csk = false;
  if (in.no_emotion_emb) c.model.use_emotion_emb = false;
  if (in.no_gru_k) c.model.use_gru_k = false;
  if (in.no_gru_s) c.model.use_gru_s = false;
  if (in.no_neutral_knowledge) c.model.use_neutral_knowledge = false;
  if (in.direct_add) c.model.direct_add = true;
  if (in.threads > 1) c.threads = in.threads;
  c.validate();
  return c;
}

struct Resources {
  std::optional<kec::KnowledgeStore> knowledge;
  std::optional<kec::Lexicon> lexicon;
  std::optional<kec::PrecomputedEmbeddings> embeddings;
  const kec::KnowledgeStore* k() const { return knowledge ? &*knowledge : nullptr; }
  const kec::Lexicon* l() const { return lexicon ? &*lexicon : nullptr; }
  const kec::PrecomputedEmbeddings* e() const { return embeddings ? &*embeddings : nullptr; }
};

Resources load_resources(const Inputs& in) {
  Resources r;
  if (!in.knowledge.empty()) r.knowledge = kec::load_knowledge(in.knowledge);
  if (!in.lexicon.empty()) r.lexicon = kec::load_lexicon(in.lexicon);
  if (!in.embeddings.empty()) r.embeddings = kec::load_embeddings(in.embeddings);
  return r;
}

json metrics_json(const kec::MetricsReport& m) {
  return {{"neg_f1", m.neg_f1},       {"pos_f1", m.pos_f1},       {"macro_f1", m.macro_f1},
          {"tp", m.confusion.tp},     {"fp", m.confusion.fp},     {"fn", m.confusion.fn},
          {"tn", m.confusion.tn}};
}

std::string metrics_line(const kec::MetricsReport& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "neg_f1=%.6f pos_f1=%.6f macro_f1=%.6f tp=%llu fp=%llu fn=%llu tn=%llu", m.neg_f1,
                m.pos_f1, m.macro_f1, static_cast<unsigned long long>(m.confusion.tp),
                static_cast<unsigned long long>(m.confusion.fp), static_cast<unsigned long long>(m.confusion.fn),
                static_cast<unsigned long long>(m.confusion.tn));
  return buf;
}

void write_record(const std::string& path, const json& j) {
  if (!path.empty()) kec::write_file(path, j.dump(2) + "\n");
}

// Model rebuilt from a checkpoint's own configuration.
struct LoadedModel {
  kec::TrainConfig config;
  std::unique_ptr<kec::KecModel> model;
};

LoadedModel load_model(const std::string& path, const kec::PrecomputedEmbeddings* emb) {
  const kec::ad::Checkpoint ck = kec::ad::load_checkpoint(path);
  LoadedModel lm;
  lm.config = kec::parse_config(ck.config_text, path + " (embedded config)");
  lm.model = std::make_unique<kec::KecModel>(lm.config.model, emb);
  lm.model->load(ck);
  return lm;
}

std::string seed_path(const std::string& out, std::uint64_t seed, bool several) {
  if (!several) return out;
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string())).string();
}

int cmd_stats(const Inputs& in) {
  const kec::Corpus corpus = kec::load_corpus(in.corpus);
  const kec::StatsReport s = kec::compute_stats(corpus);
  std::printf("positive_pairs=%zu negative_pairs=%zu dialogues=%zu utterances=%zu avg_utterance_length=%ld\n",
              s.positive_pairs, s.negative_pairs, s.dialogues, s.utterances, s.avg_utterance_length);
  write_record(in.out, {{"positive_pairs", s.positive_pairs},
                        {"negative_pairs", s.negative_pairs},
                        {"dialogues", s.dialogues},
                        {"utterances", s.utterances},
                        {"avg_utterance_length", s.avg_utterance_length},
                        {"mean_utterance_length", s.mean_utterance_length}});
  return 0;
}

int cmd_build_graph(const Inputs& in, const std::string& dump) {
  const kec::TrainConfig cfg = build_config(in);
  const Resources res = load_resources(in);
  const kec::Corpus corpus = kec::load_corpus(in.corpus);
  const auto examples = kec::prepare_examples(corpus, res.k(), res.l(), cfg.model);
  std::vector<kec::KecGraph> graphs;
  for (const auto& ex : examples) graphs.push_back(ex.graph);
  if (!in.out.empty()) {
    const auto bytes = kec::serialize_graphs(graphs);
    kec::write_file(in.out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  std::string text;
  for (const auto& g : graphs) text += kec::dump_graph(g);
  if (dump == "-") std::cout << text;
  else if (!dump.empty()) kec::write_file(dump, text);
  std::printf("graphs=%zu\n", graphs.size());
  return 0;
}

int cmd_synth(const Inputs& in, const kec::SynthOptions& opts) {
  if (in.out.empty()) throw kec::ValidationError("synth needs --out DIR");
  const kec::SynthData data = kec::synth_corpus(opts);
  std::filesystem::create_directories(in.out);
  const std::filesystem::path dir(in.out);
  kec::save_corpus(dir / "corpus.jsonl", data.corpus);
  kec::write_file(dir / "knowledge.jsonl", kec::serialize_knowledge(data.knowledge));
  kec::write_file(dir / "lexicon.tsv", kec::serialize_lexicon(kec::synth_lexicon()));
  const kec::StatsReport s = kec::compute_stats(data.corpus);
  std::printf("conversations=%zu utterances=%zu positive_pairs=%zu negative_pairs=%zu out=%s\n", s.dialogues,
              s.utterances, s.positive_pairs, s.negative_pairs, in.out.c_str());
  return 0;
}

int cmd_train(const Inputs& in) {
  const kec::TrainConfig cfg = build_config(in);
  const Resources res = load_resources(in);
  auto prep = [&](const std::string& path) {
    if (path.empty()) return std::vector<kec::Example>{};
    return kec::prepare_examples(kec::load_corpus(path), res.k(), res.l(), cfg.model);
  };
  const auto train = prep(in.corpus);
  const auto dev = prep(in.dev);
  const auto test = prep(in.test);
  const kec::Experiment ex = kec::run_experiment(cfg, train, dev, test, &std::cout, res.e());
  json record = {{"config", kec::train_config_text(cfg)}, {"runs", json::array()}};
  for (const kec::SeedRun& run : ex.runs) {
    if (!in.out.empty()) kec::ad::save_checkpoint(seed_path(in.out, run.seed, ex.runs.size() > 1), run.result.best);
    json r = {{"seed", run.seed}, {"best_epoch", run.result.best_epoch}, {"log", run.result.log}};
    if (run.result.best_dev) r["dev"] = metrics_json(*run.result.best_dev);
    if (!test.empty()) {
      r["test"] = metrics_json(run.test);
      std::printf("seed=%llu best_epoch=%d test %s\n", static_cast<unsigned long long>(run.seed),
                  run.result.best_epoch, metrics_line(run.test).c_str());
    }
    record["runs"].push_back(r);
  }
  if (!test.empty()) {
    std::printf("summary runs=%zu neg_f1=%s pos_f1=%s macro_f1=%s\n", ex.runs.size(),
                kec::format_mean_std(ex.summary.neg_f1).c_str(), kec::format_mean_std(ex.summary.pos_f1).c_str(),
                kec::format_mean_std(ex.summary.macro_f1).c_str());
  }
  if (!in.out.empty()) write_record(in.out + ".json", record);
  return 0;
}

int cmd_eval(const Inputs& in) {
  const Resources res = load_resources(in);
  LoadedModel lm = load_model(in.checkpoint, res.e());
  const auto examples = kec::prepare_examples(kec::load_corpus(in.corpus), res.k(), res.l(), lm.config.model);
  const kec::MetricsReport m = kec::evaluate(*lm.model, examples, in.threads);
  std::printf("%s\n", metrics_line(m).c_str());
  write_record(in.out, metrics_json(m));
  return 0;
}

int cmd_analyze(const Inputs& in) {
  const Resources res = load_resources(in);
  LoadedModel lm = load_model(in.checkpoint, res.e());
  const auto examples = kec::prepare_examples(kec::load_corpus(in.corpus), res.k(), res.l(), lm.config.model);
  const auto probs = kec::predict(*lm.model, examples, in.threads);
  const kec::SeDeReport rep = kec::analyze_se_de(examples, probs);
  std::cout << kec::format_se_de(rep);
  json rows = json::array();
  for (const auto& row : rep.rows) {
    auto bucket = [](const kec::RecallBucket& b) {
      json j = {{"total", b.total}, {"detected", b.detected}};
      if (auto r = b.recall()) j["recall"] = *r;
      return j;
    };
    rows.push_back({{"emotion", std::string(kec::to_string(row.target))}, {"se", bucket(row.se)}, {"de", bucket(row.de)}});
  }
  write_record(in.out, rows);
  return 0;
}

int cmd_sweep(const Inputs& in, const std::vector<int>& sizes) {
  const kec::TrainConfig cfg = build_config(in);
  const Resources res = load_resources(in);
  const kec::Corpus train = kec::load_corpus(in.corpus);
  const kec::Corpus dev = in.dev.empty() ? kec::Corpus{} : kec::load_corpus(in.dev);
  const auto rows = kec::sweep_window(cfg, sizes, train, dev, res.k(), res.l(), &std::cerr, res.e());
  std::cout << kec::format_sweep(rows);
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"window", r.window}, {"dev_macro_f1", r.dev_macro}, {"mean", r.summary.mean}, {"std", r.summary.std}});
  write_record(in.out, j);
  return 0;
}

int cmd_gradcheck(const Inputs& in, double tolerance, const kec::ad::GradCheckOptions& opts) {
  kec::TrainConfig base;
  base.model = kec::toy_model_config();
  kec::TrainConfig cfg = build_config(in, base);
  cfg.model.dropout = 0.0;
  cfg.model.layer_dropout = 0.0;
  const kec::ad::GradCheckResult r = kec::gradient_check_toy(cfg.model, in.seed.value_or(7), opts);
  std::printf("max_rel_error=%.3e max_abs_error=%.3e checked=%zu worst=%s[%zu] analytic=%.9e numeric=%.9e backend=%s\n",
              r.max_rel_error, r.max_abs_error, r.checked, r.worst_param.c_str(), r.worst_index, r.worst_analytic,
              r.worst_numeric, std::string(kec::simd::backend_name(kec::simd::active_backend())).c_str());
  if (r.max_rel_error >= tolerance) {
    std::fprintf(stderr, "gradient check failed: %.3e >= %.1e\n", r.max_rel_error, tolerance);
    return kExitData;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-enhanced conversation graphs for causal emotion entailment", "kec"};
  app.require_subcommand(1);
  Inputs in;

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_data_flags(stats, in);
  stats->add_option("--out", in.out, "Write a JSON record here");

  std::string dump;
  auto* graph = app.add_subcommand("build-graph", "Build and serialize conversation graphs");
  add_data_flags(graph, in);
  add_model_flags(graph, in);
  graph->add_option("--out", in.out, "Serialized graph file");
  graph->add_option("--dump", dump, "Text dump file ('-' for stdout)");

  kec::SynthOptions synth_opts;
  bool unplanted = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus, knowledge and lexicon");
  synth->add_option("--out", in.out, "Output directory")->required();
  synth->add_option("--conversations", synth_opts.conversations, "Number of conversations");
  synth->add_option("--min-len", synth_opts.min_len, "Minimum utterances per conversation");
  synth->add_option("--max-len", synth_opts.max_len, "Maximum utterances per conversation");
  synth->add_option("--seed", synth_opts.seed, "Generator seed");
  synth->add_option("--marker-rate", synth_opts.marker_rate, "Share of utterances whose beams mark a cause");
  synth->add_flag("--unplanted", unplanted, "Random causes instead of knowledge-planted ones");

  auto* train = app.add_subcommand("train", "Train over the configured seeds");
  add_data_flags(train, in);
  add_model_flags(train, in);
  train->add_option("--dev", in.dev, "Dev corpus (checkpoint selection)")->check(CLI::ExistingFile);
  train->add_option("--test", in.test, "Test corpus (reported per seed)")->check(CLI::ExistingFile);
  train->add_option("--out", in.out, "Checkpoint path (.seedN inserted for several seeds)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_data_flags(eval, in);
  eval->add_option("--checkpoint", in.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", in.out, "Write a JSON record here");
  eval->add_option("--threads", in.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Same/different-emotion recall of causal pairs");
  add_data_flags(analyze, in);
  analyze->add_option("--checkpoint", in.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", in.out, "Write a JSON record here");
  analyze->add_option("--threads", in.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<int> sizes{1, 2, 3, 4};
  auto* sweep = app.add_subcommand("sweep", "Dev macro F1 across window sizes (w_c = w_k)");
  add_data_flags(sweep, in);
  add_model_flags(sweep, in);
  sweep->add_option("--dev", in.dev, "Dev corpus")->required()->check(CLI::ExistingFile);
  sweep->add_option("--sizes", sizes, "Window sizes")->delimiter(',');
  sweep->add_option("--out", in.out, "Write a JSON record here");

  double tolerance = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every model gradient");
  add_model_flags(gradcheck, in);
  gradcheck->add_option("--tolerance", tolerance, "Maximum accepted relative error");
  kec::ad::GradCheckOptions gc_opts;
  gradcheck->add_option("--eps", gc_opts.eps, "Central-difference step");
  gradcheck->add_option("--entries", gc_opts.max_entries_per_param, "Sampled entries per large parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*stats) return cmd_stats(in);
    if (*graph) return cmd_build_graph(in, dump);
    if (*synth) {
      synth_opts.planted = !unplanted;
      return cmd_synth(in, synth_opts);
    }
    if (*train) return cmd_train(in);
    if (*eval) return cmd_eval(in);
    if (*analyze) return cmd_analyze(in);
    if (*sweep) return cmd_sweep(in, sizes);
    if (*gradcheck) return cmd_gradcheck(in, tolerance, gc_opts);
  } catch (const kec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
