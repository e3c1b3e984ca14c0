// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/model.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

#include "kec/ad/ops.hpp"
#include "kec/ad/optim.hpp"
#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

using ad::Tensor;

namespace {

std::size_t emotion_index(Emotion e) {
  for (std::size_t k = 0; k < kAllEmotions.size(); ++k)
    if (kAllEmotions[k] == e) return k;
  throw ValidationError("unknown emotion value");
}

std::uint64_t site_stream(std::uint64_t base, std::uint64_t site) { return splitmix64(base ^ splitmix64(site + 1)); }

}  // namespace

KecModel::KecModel(ModelConfig config, const PrecomputedEmbeddings* embeddings)
    : config_(std::move(config)), encoder_((config_.validate(), config_), params_, embeddings) {
  const std::size_t d = config_.d_u;
  if (config_.use_emotion_emb) {
    emotion_table_ = &params_.add("emotion.table", {kAllEmotions.size(), config_.d_e});
    h0_w_ = &params_.add("h0.w", {d + config_.d_e, d});
  } else {
    h0_w_ = &params_.add("h0.w", {d, d});
  }
  h0_b_ = &params_.add("h0.b", {1, d});

  for (int l = 1; l <= config_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerParams lp;
    lp.w_w = &params_.add(p + "w_w", {2 * d, 1});
    lp.w_k = &params_.add(p + "w_k", {d, d});
    lp.w_sd = &params_.add(p + "w_sd", {d, d});
    lp.w_id = &params_.add(p + "w_id", {d, d});
    lp.gru_n = ad::add_gru_params(params_, p + "gru_n", d, d);
    lp.gru_c = ad::add_gru_params(params_, p + "gru_c", d, d);
    if (config_.knowledge_units() && config_.use_gru_k) lp.gru_k = ad::add_gru_params(params_, p + "gru_k", d, d);
    if (config_.knowledge_units() && config_.use_gru_s) lp.gru_s = ad::add_gru_params(params_, p + "gru_s", d, d);
    layers_.push_back(lp);
  }

  const std::size_t dims[4] = {config_.predictor_input(), config_.mlp_hidden, config_.mlp_hidden, 1};
  for (int k = 0; k < 3; ++k) {
    mlp_w_[k] = &params_.add("mlp.w" + std::to_string(k + 1), {dims[k], dims[k + 1]});
    mlp_b_[k] = &params_.add("mlp.b" + std::to_string(k + 1), {1, dims[k + 1]});
  }
}

void KecModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  encoder_.initialize(rng);
  auto& store = params_;
  auto mut = [&](const ad::Parameter* p) -> ad::Parameter& { return store.get(p->name()); };

  if (emotion_table_) {
    ad::Parameter& table = mut(emotion_table_);
    const std::size_t de = config_.d_e;
    const std::size_t dr = encoder_.raw_dim();
    // Provider-dim -> d_e map used only to seed the table.
    ad::Parameter proj("emotion.init", {dr, de}, 0);
    ad::xavier_uniform(proj, rng);
    const double bound = std::sqrt(6.0 / static_cast<double>(1 + de));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (std::size_t e = 0; e < kAllEmotions.size(); ++e) {
      const std::string word(to_string(kAllEmotions[e]));
      std::vector<double> raw;
      if (config_.emotion_init == EmotionInit::Encoder) raw = encoder_.raw_vector(word, "emotion:" + word);
      for (std::size_t c = 0; c < de; ++c) {
        double v = 0.0;
        if (raw.empty()) {
          v = uni(rng);
        } else {
          for (std::size_t r = 0; r < dr; ++r) v += raw[r] * proj.value()[r * de + c];
        }
        table.value()[e * de + c] = v;
      }
    }
  }
  ad::xavier_uniform(mut(h0_w_), rng);
  std::fill(mut(h0_b_).value().begin(), mut(h0_b_).value().end(), 0.0);

  auto init_gru = [&](const ad::GruParams& g) {
    const double b = 1.0 / std::sqrt(static_cast<double>(g.hidden_dim()));
    for (const ad::Parameter* p : {g.w_ih, g.w_hh, g.b_ih, g.b_hh}) ad::uniform_fill(mut(p), b, rng);
  };
  for (const LayerParams& lp : layers_) {
    for (const ad::Parameter* p : {lp.w_w, lp.w_k, lp.w_sd, lp.w_id}) ad::xavier_uniform(mut(p), rng);
    init_gru(lp.gru_n);
    init_gru(lp.gru_c);
    if (lp.gru_k) init_gru(*lp.gru_k);
    if (lp.gru_s) init_gru(*lp.gru_s);
  }
  for (int k = 0; k < 3; ++k) {
    ad::xavier_uniform(mut(mlp_w_[k]), rng);
    std::fill(mut(mlp_b_[k]).value().begin(), mut(mlp_b_[k]).value().end(), 0.0);
  }
}

std::vector<Tensor> KecModel::init_node_states(ad::Tape& tape, const KecGraph& graph) const {
  const int n = graph.size();
  std::vector<Tensor> s;
  s.reserve(static_cast<std::size_t>(n));
  for (const GraphNode& node : graph.nodes()) s.push_back(encoder_.encode_utterance(tape, node));
  Tensor x = ad::stack_rows(s);
  if (config_.use_emotion_emb) {
    std::vector<std::size_t> idx;
    for (const GraphNode& node : graph.nodes()) idx.push_back(emotion_index(node.emotion));
    const Tensor parts[2] = {x, ad::gather_rows(tape.param(*emotion_table_), idx)};
    x = ad::concat_cols(parts);
  }
  const Tensor h0 = ad::add_bias(ad::matmul(x, tape.param(*h0_w_)), tape.param(*h0_b_));
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(ad::row(h0, static_cast<std::size_t>(i)));
  return out;
}

std::vector<Tensor> KecModel::ke_dag_layer(const std::vector<Tensor>& h_prev, const KecGraph& graph,
                                           const std::function<Tensor(int, int)>& k, const LayerParams& lp,
                                           std::vector<AttentionRow>* trace) const {
  const int n = graph.size();
  if (static_cast<int>(h_prev.size()) != n) throw ShapeError("ke_dag_layer: state count does not match graph");
  ad::Tape& tape = h_prev.front().tape();
  const Tensor w_w = tape.param(*lp.w_w);
  const Tensor w_k = tape.param(*lp.w_k);
  const Tensor w_sd = tape.param(*lp.w_sd);
  const Tensor w_id = tape.param(*lp.w_id);
  const bool knowledge = config_.knowledge_units();

  // W_k k is shared by every cell carrying the same vector.
  std::unordered_map<std::uint32_t, Tensor> wk_memo;
  auto transformed = [&](const Tensor& kv) {
    auto it = wk_memo.find(kv.id());
    if (it != wk_memo.end()) return it->second;
    Tensor t = ad::matmul(kv, w_k);
    wk_memo.emplace(kv.id(), t);
    return t;
  };

  std::vector<Tensor> h_cur;
  h_cur.reserve(static_cast<std::size_t>(n));
  if (trace) trace->assign(static_cast<std::size_t>(n), {});
  const Tensor zero = tape.zeros({1, config_.d_u});

  for (int i = 1; i <= n; ++i) {
    const Tensor hp = h_prev[static_cast<std::size_t>(i - 1)];
    const std::vector<int> nbrs = graph.a_c().neighbors(i);
    Tensor msg = zero;
    Tensor nlg = zero;
    if (!nbrs.empty()) {
      std::vector<Tensor> scores, values, knows;
      for (int j : nbrs) {
        const Tensor hj = h_cur[static_cast<std::size_t>(j - 1)];
        const Tensor wkk = transformed(k(i, j));
        const Tensor keyed = ad::add(hj, wkk);
        const Tensor cat[2] = {hp, keyed};
        scores.push_back(ad::matmul(ad::concat_cols(cat), w_w));
        const Tensor& w_rel = graph.a_c().at(i, j).rel == RelationType::SD ? w_sd : w_id;
        values.push_back(ad::matmul(config_.direct_add ? keyed : hj, w_rel));
        knows.push_back(wkk);
      }
      const Tensor alpha = ad::masked_softmax(ad::stack_rows(scores), nbrs.size());
      const Tensor alpha_t = ad::transpose(alpha);
      msg = ad::matmul(alpha_t, ad::stack_rows(values));
      nlg = ad::matmul(alpha_t, ad::stack_rows(knows));
      if (trace) {
        auto v = alpha.value();
        (*trace)[static_cast<std::size_t>(i - 1)] = {nbrs, {v.begin(), v.end()}};
      }
    }
    Tensor h = ad::add(ad::gru_cell(hp, msg, lp.gru_n), ad::gru_cell(msg, hp, lp.gru_c));
    if (knowledge && lp.gru_k) h = ad::add(h, ad::gru_cell(nlg, hp, *lp.gru_k));
    if (knowledge && lp.gru_s) h = ad::add(h, ad::gru_cell(k(i, i), hp, *lp.gru_s));
    h_cur.push_back(h);
  }
  return h_cur;
}

ForwardResult KecModel::forward(ad::Tape& tape, const KecGraph& graph, const ForwardOptions& options) const {
  const int n = graph.size();
  if (n == 0) throw ShapeError("forward: empty graph");
  ForwardResult res;
  EncoderProvider::Cache cache;
  auto k = [&](int i, int j) -> Tensor {
    const std::string& text = config_.use_csk ? graph.a_k().at(i, j).klg : std::string(kNoneText);
    return encoder_.encode_text(tape, text, cache);
  };

  res.states.push_back(init_node_states(tape, graph));
  for (int l = 1; l <= config_.layers; ++l) {
    std::vector<AttentionRow> rows;
    std::vector<Tensor> h = ke_dag_layer(res.states.back(), graph, k, layers_[static_cast<std::size_t>(l - 1)],
                                         options.trace ? &rows : nullptr);
    if (config_.layer_dropout > 0.0 && options.train) {
      for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = ad::dropout(h[i], config_.layer_dropout, true,
                           site_stream(options.dropout_stream, 1000 * static_cast<std::uint64_t>(l) + i));
    }
    res.states.push_back(std::move(h));
    if (options.trace) res.attention.push_back(std::move(rows));
  }

  std::vector<Tensor> node_rows;
  for (int i = 0; i < n; ++i) {
    if (config_.layer_concat == LayerConcat::Last) {
      node_rows.push_back(res.states.back()[static_cast<std::size_t>(i)]);
    } else {
      std::vector<Tensor> parts;
      for (const auto& layer : res.states) parts.push_back(layer[static_cast<std::size_t>(i)]);
      node_rows.push_back(ad::concat_cols(parts));
    }
  }
  const Tensor nodes = ad::stack_rows(node_rows);

  std::vector<std::size_t> tgt, src;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j) {
      res.pairs.push_back({i, j, 0});
      tgt.push_back(static_cast<std::size_t>(i - 1));
      src.push_back(static_cast<std::size_t>(j - 1));
    }
  const Tensor cat[2] = {ad::gather_rows(nodes, tgt), ad::gather_rows(nodes, src)};
  Tensor x = ad::concat_cols(cat);
  for (int m = 0; m < 3; ++m) {
    x = ad::add_bias(ad::matmul(x, tape.param(*mlp_w_[m])), tape.param(*mlp_b_[m]));
    if (m < 2)
      x = ad::dropout(ad::relu(x), config_.dropout, options.train,
                      site_stream(options.dropout_stream, static_cast<std::uint64_t>(m)));
  }
  res.probs = ad::sigmoid(x);
  return res;
}

Tensor pair_loss(Tensor probs, std::span<const double> labels) { return ad::bce_sum(probs, labels); }

}  // namespace kec
