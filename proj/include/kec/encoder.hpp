// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kec/ad/tape.hpp"
#include "kec/config.hpp"
#include "kec/graph.hpp"

namespace kec {

// Fixed vectors keyed by utterance id, "klg:<16 hex digits of FNV-1a>" for
// knowledge text, or "emotion:<name>". One JSON record per line:
// {"key": ..., "vector": [d_raw floats]}.
class PrecomputedEmbeddings {
 public:
  void add(const std::string& key, std::vector<double> vec);
  const std::vector<double>* find(const std::string& key) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

PrecomputedEmbeddings parse_embeddings(std::string_view text, const std::string& source = "<embeddings>");
PrecomputedEmbeddings load_embeddings(const std::filesystem::path& path);
std::string knowledge_key(std::string_view klg);

// Lowercased whitespace tokens hashed into the embedding table.
std::vector<std::string> encoder_tokens(std::string_view text);

// Stand-in for a pretrained utterance encoder with the same output contract:
// a raw d_raw vector per text (hashed token embeddings max-pooled over tokens,
// or a precomputed vector), followed by a trainable Linear to d_u. Utterances
// and knowledge text share the provider.
class EncoderProvider {
 public:
  // Registers encoder.* parameters in `store`.
  EncoderProvider(const ModelConfig& config, ad::ParamStore& store, const PrecomputedEmbeddings* embeddings);

  // Per-tape memo of encoded knowledge text, so each distinct string (and
  // "none") is encoded once per forward pass.
  class Cache {
   public:
    std::unordered_map<std::string, ad::Tensor> entries;
  };

  ad::Tensor encode_utterance(ad::Tape& tape, const GraphNode& node) const;
  ad::Tensor encode_text(ad::Tape& tape, const std::string& text, Cache& cache) const;
  // Raw pre-projection vector (used to seed emotion embeddings); empty when
  // the provider cannot produce one for this text.
  std::vector<double> raw_vector(const std::string& text, const std::string& precomputed_key) const;

  std::size_t raw_dim() const { return raw_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  void initialize(std::mt19937_64& rng);

 private:
  ad::Tensor raw(ad::Tape& tape, std::string_view text, const std::string& key) const;
  ad::Tensor project(ad::Tensor raw) const;

  EncoderMode mode_;
  std::size_t buckets_;
  std::size_t raw_dim_;
  std::size_t out_dim_;
  const PrecomputedEmbeddings* embeddings_;
  ad::Parameter* table_ = nullptr;
  ad::Parameter* proj_w_ = nullptr;
  ad::Parameter* proj_b_ = nullptr;
};

}  // namespace kec
