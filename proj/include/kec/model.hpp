// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kec/ad/checkpoint.hpp"
#include "kec/ad/gru.hpp"
#include "kec/ad/tape.hpp"
#include "kec/config.hpp"
#include "kec/encoder.hpp"
#include "kec/graph.hpp"

namespace kec {

struct LayerParams {
  const ad::Parameter* w_w = nullptr;   // [2 d_u, 1] attention scorer
  const ad::Parameter* w_k = nullptr;   // [d_u, d_u] knowledge transform
  const ad::Parameter* w_sd = nullptr;  // [d_u, d_u]
  const ad::Parameter* w_id = nullptr;  // [d_u, d_u]
  ad::GruParams gru_n;
  ad::GruParams gru_c;
  std::optional<ad::GruParams> gru_k;  // absent when ablated
  std::optional<ad::GruParams> gru_s;
};

struct ForwardOptions {
  bool train = false;              // enables dropout
  std::uint64_t dropout_stream = 0;
  bool trace = false;              // fill ForwardResult::attention
};

struct AttentionRow {
  std::vector<int> sources;     // 1-based neighbors, ascending
  std::vector<double> weights;  // alpha, aligned with sources
};

struct ForwardResult {
  ad::Tensor probs;              // [P, 1], pairs in enumerate_pairs order
  std::vector<PairLabel> pairs;  // label field is left 0
  // states[l][i-1] = h_i^l, l = 0..L, each [1, d_u].
  std::vector<std::vector<ad::Tensor>> states;
  // attention[l-1][i-1] for l = 1..L; only with ForwardOptions::trace.
  std::vector<std::vector<AttentionRow>> attention;
};

// Parameters and forward pass of the knowledge-enhanced DAG network. Row
// vectors throughout: a linear map is x W with W stored [in, out].
class KecModel {
 public:
  explicit KecModel(ModelConfig config, const PrecomputedEmbeddings* embeddings = nullptr);
  KecModel(const KecModel&) = delete;
  KecModel& operator=(const KecModel&) = delete;

  // Seeded initialization of every parameter (registration order).
  void initialize(std::uint64_t seed);
  void load(const ad::Checkpoint& ck) { ad::restore_params(params_, ck); }

  const ModelConfig& config() const { return config_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }
  const EncoderProvider& encoder() const { return encoder_; }
  const LayerParams& layer(int l) const { return layers_.at(static_cast<std::size_t>(l - 1)); }
  std::size_t parameter_count() const { return params_.total_size(); }

  // h^0 rows for every node: Linear([s_i || eemb_{e_i}]) or Linear(s_i).
  std::vector<ad::Tensor> init_node_states(ad::Tape& tape, const KecGraph& graph) const;

  // One layer over all nodes in increasing index order. `k(i, j)` supplies
  // the encoded knowledge vector for cell (i, j), j <= i.
  std::vector<ad::Tensor> ke_dag_layer(const std::vector<ad::Tensor>& h_prev, const KecGraph& graph,
                                       const std::function<ad::Tensor(int, int)>& k, const LayerParams& params,
                                       std::vector<AttentionRow>* trace) const;

  ForwardResult forward(ad::Tape& tape, const KecGraph& graph, const ForwardOptions& options = {}) const;

 private:
  ModelConfig config_;
  ad::ParamStore params_;
  EncoderProvider encoder_;
  const ad::Parameter* emotion_table_ = nullptr;  // [7, d_e]
  const ad::Parameter* h0_w_ = nullptr;
  const ad::Parameter* h0_b_ = nullptr;
  std::vector<LayerParams> layers_;
  const ad::Parameter* mlp_w_[3] = {};
  const ad::Parameter* mlp_b_[3] = {};
};

// Summed binary cross entropy over the pairs; labels align with probs rows.
ad::Tensor pair_loss(ad::Tensor probs, std::span<const double> labels);

}  // namespace kec
