// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kec {

enum class LayerConcat : std::uint8_t { All, Last };
enum class EncoderMode : std::uint8_t { Hashed, Precomputed };
enum class EmotionInit : std::uint8_t { Encoder, Random };

struct ModelConfig {
  std::size_t d_u = 300;
  std::size_t d_e = 200;
  int layers = 5;
  int context_window = 2;
  int knowledge_window = 2;
  std::size_t mlp_hidden = 300;
  double dropout = 0.1;        // predictor MLP
  double layer_dropout = 0.0;  // on each DAG layer output; off by default

  bool use_csk = true;
  bool use_emotion_emb = true;
  bool use_gru_k = true;
  bool use_gru_s = true;
  bool use_neutral_knowledge = true;
  bool direct_add = false;
  LayerConcat layer_concat = LayerConcat::All;

  EncoderMode encoder = EncoderMode::Hashed;
  std::size_t encoder_buckets = 4096;
  std::size_t encoder_dim = 64;  // d_raw
  EmotionInit emotion_init = EmotionInit::Encoder;
  std::uint64_t init_seed = 0;  // non-zero: fixed initialization across run seeds

  // GRU_k / GRU_s exist only when knowledge is on and not added directly.
  bool knowledge_units() const { return use_csk && !direct_add; }
  std::size_t node_dim() const;       // per-utterance width fed to the predictor
  std::size_t predictor_input() const { return 2 * node_dim(); }

  void validate() const;  // throws ValidationError
  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  ModelConfig model;
  int epochs = 40;
  std::size_t batch_size = 4;
  std::size_t accumulation = 2;
  double lr = 3e-5;
  double weight_decay = 1e-4;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string checkpoint;
  std::size_t threads = 1;
  // Stop early once train pos F1 reaches this value (checked every epoch); <= 0 disables.
  double stop_at_train_pos_f1 = 0.0;

  void validate() const;
};

// Flat "key = value" text; '#' comments and blank lines ignored. Keys are the
// field names above (model fields unprefixed). Unknown keys are an error.
void apply_config_entry(TrainConfig& config, std::string_view key, std::string_view value);
TrainConfig parse_config(std::string_view text, const std::string& source = "<config>");
TrainConfig load_config(const std::string& path);
std::string model_config_text(const ModelConfig& config);
std::string train_config_text(const TrainConfig& config);
ModelConfig parse_model_config(std::string_view text);

}  // namespace kec
