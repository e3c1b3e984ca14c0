// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

std::size_t ModelConfig::node_dim() const {
  return layer_concat == LayerConcat::All ? static_cast<std::size_t>(layers + 1) * d_u : d_u;
}

void ModelConfig::validate() const {
  if (d_u == 0) throw ValidationError("d_u must be positive");
  if (use_emotion_emb && d_e == 0) throw ValidationError("d_e must be positive");
  if (layers < 0) throw ValidationError("layers must be >= 0");
  if (context_window < 1) throw ValidationError("context_window must be >= 1");
  if (knowledge_window < 1) throw ValidationError("knowledge_window must be >= 1");
  if (mlp_hidden == 0) throw ValidationError("mlp_hidden must be positive");
  if (dropout < 0.0 || dropout >= 1.0 || layer_dropout < 0.0 || layer_dropout >= 1.0)
    throw ValidationError("dropout rates must be in [0, 1)");
  if (encoder_dim == 0 || (encoder == EncoderMode::Hashed && encoder_buckets == 0))
    throw ValidationError("encoder sizes must be positive");
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size == 0 || accumulation == 0) throw ValidationError("batch_size and accumulation must be positive");
  if (!(lr > 0.0) || weight_decay < 0.0) throw ValidationError("lr must be positive and weight_decay >= 0");
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  if (threads == 0) throw ValidationError("threads must be positive");
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ValidationError("bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string l = to_lower(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw ValidationError("bad boolean '" + std::string(v) + "' for " + std::string(key));
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void apply_config_entry(TrainConfig& c, std::string_view key, std::string_view value) {
  ModelConfig& m = c.model;
  const std::string k(key);
  const std::string v = trim(value);
  if (k == "d_u") m.d_u = parse_number<std::size_t>(k, v);
  else if (k == "d_e") m.d_e = parse_number<std::size_t>(k, v);
  else if (k == "layers") m.layers = parse_number<int>(k, v);
  else if (k == "context_window" || k == "w_c") m.context_window = parse_number<int>(k, v);
  else if (k == "knowledge_window" || k == "w_k") m.knowledge_window = parse_number<int>(k, v);
  else if (k == "mlp_hidden") m.mlp_hidden = parse_number<std::size_t>(k, v);
  else if (k == "dropout") m.dropout = parse_number<double>(k, v);
  else if (k == "layer_dropout") m.layer_dropout = parse_number<double>(k, v);
  else if (k == "use_csk") m.use_csk = parse_bool(k, v);
  else if (k == "use_emotion_emb") m.use_emotion_emb = parse_bool(k, v);
  else if (k == "use_gru_k") m.use_gru_k = parse_bool(k, v);
  else if (k == "use_gru_s") m.use_gru_s = parse_bool(k, v);
  else if (k == "use_neutral_knowledge") m.use_neutral_knowledge = parse_bool(k, v);
  else if (k == "direct_add_variant" || k == "direct_add") m.direct_add = parse_bool(k, v);
  else if (k == "layer_concat") {
    if (v == "all") m.layer_concat = LayerConcat::All;
    else if (v == "last") m.layer_concat = LayerConcat::Last;
    else throw ValidationError("layer_concat must be 'all' or 'last'");
  } else if (k == "encoder") {
    if (v == "hashed") m.encoder = EncoderMode::Hashed;
    else if (v == "precomputed") m.encoder = EncoderMode::Precomputed;
    else throw ValidationError("encoder must be 'hashed' or 'precomputed'");
  } else if (k == "encoder_buckets") m.encoder_buckets = parse_number<std::size_t>(k, v);
  else if (k == "encoder_dim") m.encoder_dim = parse_number<std::size_t>(k, v);
  else if (k == "emotion_init") {
    if (v == "encoder") m.emotion_init = EmotionInit::Encoder;
    else if (v == "random") m.emotion_init = EmotionInit::Random;
    else throw ValidationError("emotion_init must be 'encoder' or 'random'");
  } else if (k == "init_seed") m.init_seed = parse_number<std::uint64_t>(k, v);
  else if (k == "epochs") c.epochs = parse_number<int>(k, v);
  else if (k == "batch_size") c.batch_size = parse_number<std::size_t>(k, v);
  else if (k == "accumulation") c.accumulation = parse_number<std::size_t>(k, v);
  else if (k == "lr") c.lr = parse_number<double>(k, v);
  else if (k == "weight_decay") c.weight_decay = parse_number<double>(k, v);
  else if (k == "checkpoint") c.checkpoint = v;
  else if (k == "threads") c.threads = parse_number<std::size_t>(k, v);
  else if (k == "stop_at_train_pos_f1") c.stop_at_train_pos_f1 = parse_number<double>(k, v);
  else if (k == "seeds") {
    c.seeds.clear();
    std::string list = v;
    for (char& ch : list)
      if (ch == ',') ch = ' ';
    for (const std::string& s : split_whitespace(list)) c.seeds.push_back(parse_number<std::uint64_t>(k, s));
  } else {
    throw ValidationError("unknown config key '" + k + "'");
  }
}

TrainConfig parse_config(std::string_view text, const std::string& source) {
  TrainConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    try {
      apply_config_entry(c, trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return c;
}

TrainConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string model_config_text(const ModelConfig& m) {
  std::ostringstream os;
  os << "d_u = " << m.d_u << '\n'
     << "d_e = " << m.d_e << '\n'
     << "layers = " << m.layers << '\n'
     << "context_window = " << m.context_window << '\n'
     << "knowledge_window = " << m.knowledge_window << '\n'
     << "mlp_hidden = " << m.mlp_hidden << '\n'
     << "dropout = " << fmt(m.dropout) << '\n'
     << "layer_dropout = " << fmt(m.layer_dropout) << '\n'
     << "use_csk = " << (m.use_csk ? "true" : "false") << '\n'
     << "use_emotion_emb = " << (m.use_emotion_emb ? "true" : "false") << '\n'
     << "use_gru_k = " << (m.use_gru_k ? "true" : "false") << '\n'
     << "use_gru_s = " << (m.use_gru_s ? "true" : "false") << '\n'
     << "use_neutral_knowledge = " << (m.use_neutral_knowledge ? "true" : "false") << '\n'
     << "direct_add_variant = " << (m.direct_add ? "true" : "false") << '\n'
     << "layer_concat = " << (m.layer_concat == LayerConcat::All ? "all" : "last") << '\n'
     << "encoder = " << (m.encoder == EncoderMode::Hashed ? "hashed" : "precomputed") << '\n'
     << "encoder_buckets = " << m.encoder_buckets << '\n'
     << "encoder_dim = " << m.encoder_dim << '\n'
     << "emotion_init = " << (m.emotion_init == EmotionInit::Encoder ? "encoder" : "random") << '\n'
     << "init_seed = " << m.init_seed << '\n';
  return os.str();
}

std::string train_config_text(const TrainConfig& c) {
  std::ostringstream os;
  os << model_config_text(c.model) << "epochs = " << c.epochs << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "accumulation = " << c.accumulation << '\n'
     << "lr = " << fmt(c.lr) << '\n'
     << "weight_decay = " << fmt(c.weight_decay) << '\n'
     << "threads = " << c.threads << '\n'
     << "stop_at_train_pos_f1 = " << fmt(c.stop_at_train_pos_f1) << '\n'
     << "seeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
  os << '\n';
  if (!c.checkpoint.empty()) os << "checkpoint = " << c.checkpoint << '\n';
  return os.str();
}

ModelConfig parse_model_config(std::string_view text) { return parse_config(text, "<model config>").model; }

}  // namespace kec
