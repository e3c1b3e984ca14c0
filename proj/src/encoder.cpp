// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/encoder.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "kec/ad/ops.hpp"
#include "kec/ad/optim.hpp"
#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

using nlohmann::json;

void PrecomputedEmbeddings::add(const std::string& key, std::vector<double> vec) {
  if (vec.empty()) throw ValidationError("embedding '" + key + "' is empty");
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_)
    throw ValidationError("embedding '" + key + "' has dimension " + std::to_string(vec.size()) + ", expected " +
                          std::to_string(dim_));
  for (double v : vec)
    if (!std::isfinite(v)) throw ValidationError("embedding '" + key + "' has a non-finite value");
  if (!vectors_.emplace(key, std::move(vec)).second) throw ValidationError("duplicate embedding key '" + key + "'");
}

const std::vector<double>* PrecomputedEmbeddings::find(const std::string& key) const {
  auto it = vectors_.find(key);
  return it == vectors_.end() ? nullptr : &it->second;
}

PrecomputedEmbeddings parse_embeddings(std::string_view text, const std::string& source) {
  PrecomputedEmbeddings out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      out.add(rec.at("key").get<std::string>(), rec.at("vector").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, std::string("malformed record: ") + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return out;
}

PrecomputedEmbeddings load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path), path.string());
}

std::string knowledge_key(std::string_view klg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "klg:%016llx", static_cast<unsigned long long>(fnv1a64(klg)));
  return buf;
}

std::vector<std::string> encoder_tokens(std::string_view text) { return split_whitespace(to_lower(text)); }

EncoderProvider::EncoderProvider(const ModelConfig& config, ad::ParamStore& store,
                                 const PrecomputedEmbeddings* embeddings)
    : mode_(config.encoder),
      buckets_(config.encoder_buckets),
      raw_dim_(config.encoder_dim),
      out_dim_(config.d_u),
      embeddings_(embeddings) {
  if (mode_ == EncoderMode::Precomputed) {
    if (!embeddings_) throw ValidationError("precomputed encoder needs an embeddings file");
    if (embeddings_->dim() != raw_dim_)
      throw ValidationError("embeddings have dimension " + std::to_string(embeddings_->dim()) +
                            " but encoder_dim is " + std::to_string(raw_dim_));
  } else {
    table_ = &store.add("encoder.table", {buckets_, raw_dim_});
  }
  proj_w_ = &store.add("encoder.proj.w", {raw_dim_, out_dim_});
  proj_b_ = &store.add("encoder.proj.b", {1, out_dim_});
}

void EncoderProvider::initialize(std::mt19937_64& rng) {
  if (table_) ad::uniform_fill(*table_, std::sqrt(6.0 / static_cast<double>(1 + raw_dim_)), rng);
  ad::xavier_uniform(*proj_w_, rng);
  std::fill(proj_b_->value().begin(), proj_b_->value().end(), 0.0);
}

ad::Tensor EncoderProvider::raw(ad::Tape& tape, std::string_view text, const std::string& key) const {
  if (mode_ == EncoderMode::Precomputed) {
    const std::vector<double>* v = embeddings_->find(key);
    if (!v) throw ValidationError("no precomputed embedding for '" + key + "'");
    return tape.constant({1, raw_dim_}, *v);
  }
  const std::vector<std::string> tokens = encoder_tokens(text);
  if (tokens.empty()) throw ValidationError("cannot encode empty text");
  std::vector<std::size_t> rows;
  rows.reserve(tokens.size());
  for (const std::string& t : tokens) rows.push_back(static_cast<std::size_t>(fnv1a64(t) % buckets_));
  return ad::maxpool_rows(ad::gather_rows(tape.param(*table_), rows));
}

ad::Tensor EncoderProvider::project(ad::Tensor raw) const {
  ad::Tape& tape = raw.tape();
  return ad::add_bias(ad::matmul(raw, tape.param(*proj_w_)), tape.param(*proj_b_));
}

ad::Tensor EncoderProvider::encode_utterance(ad::Tape& tape, const GraphNode& node) const {
  return project(raw(tape, join(node.tokens, " "), node.utterance_id));
}

ad::Tensor EncoderProvider::encode_text(ad::Tape& tape, const std::string& text, Cache& cache) const {
  if (auto it = cache.entries.find(text); it != cache.entries.end()) return it->second;
  ad::Tensor t = project(raw(tape, text, knowledge_key(text)));
  cache.entries.emplace(text, t);
  return t;
}

std::vector<double> EncoderProvider::raw_vector(const std::string& text, const std::string& precomputed_key) const {
  if (mode_ == EncoderMode::Precomputed) {
    const std::vector<double>* v = embeddings_->find(precomputed_key);
    return v ? *v : std::vector<double>{};
  }
  ad::Tape tape(false);
  auto v = raw(tape, text, precomputed_key).value();
  return {v.begin(), v.end()};
}

}  // namespace kec
