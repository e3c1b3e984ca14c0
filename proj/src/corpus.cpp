// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>
#include <unordered_set>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

using nlohmann::json;

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::Neutral: return "neutral";
    case Emotion::Happiness: return "happiness";
    case Emotion::Sadness: return "sadness";
    case Emotion::Anger: return "anger";
    case Emotion::Fear: return "fear";
    case Emotion::Surprise: return "surprise";
    case Emotion::Disgust: return "disgust";
  }
  return "neutral";
}

std::optional<Emotion> parse_emotion(std::string_view label) {
  const std::string l = to_lower(label);
  if (l == "neutral") return Emotion::Neutral;
  if (l == "happiness" || l == "happy") return Emotion::Happiness;
  if (l == "sadness" || l == "sad") return Emotion::Sadness;
  if (l == "anger" || l == "angry") return Emotion::Anger;
  if (l == "fear" || l == "fearful") return Emotion::Fear;
  if (l == "surprise" || l == "surprised") return Emotion::Surprise;
  if (l == "disgust" || l == "disgusted") return Emotion::Disgust;
  return std::nullopt;
}

bool Conversation::is_cause(int target, int source) const {
  return std::binary_search(causal_pairs.begin(), causal_pairs.end(), CausalPair{target, source});
}

void validate_conversation(const Conversation& conv) {
  const std::string where = "conversation '" + conv.id + "': ";
  if (conv.id.empty()) throw ValidationError("conversation with empty id");
  if (conv.utterances.empty()) throw ValidationError(where + "no utterances");
  for (std::size_t k = 0; k < conv.utterances.size(); ++k) {
    const Utterance& u = conv.utterances[k];
    if (u.index != static_cast<int>(k) + 1)
      throw ValidationError(where + "utterance indices must be 1..N contiguous");
    if (u.id.empty()) throw ValidationError(where + "utterance " + std::to_string(u.index) + " has empty id");
    if (u.conv_id != conv.id) throw ValidationError(where + "utterance '" + u.id + "' has mismatched conv_id");
    if (u.tokens.empty()) throw ValidationError(where + "utterance '" + u.id + "' has empty text");
  }
  const int n = conv.size();
  for (std::size_t k = 0; k < conv.causal_pairs.size(); ++k) {
    const CausalPair& p = conv.causal_pairs[k];
    const std::string pair = "(" + std::to_string(p.target) + "," + std::to_string(p.source) + ")";
    if (p.source < 1 || p.target < 1 || p.target > n)
      throw ValidationError(where + "causal pair " + pair + " out of range");
    if (p.source > p.target)
      throw ValidationError(where + "causal pair " + pair + " has source after target");
    if (conv.at(p.target).emotion == Emotion::Neutral)
      throw ValidationError(where + "causal pair " + pair + " has a neutral target");
    if (k > 0) {
      if (conv.causal_pairs[k - 1] == p) throw ValidationError(where + "duplicate causal pair " + pair);
      if (conv.causal_pairs[k - 1] > p) throw ValidationError(where + "causal pairs not sorted");
    }
  }
}

void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> conv_ids;
  std::unordered_set<std::string> utt_ids;
  for (const Conversation& c : corpus) {
    validate_conversation(c);
    if (!conv_ids.insert(c.id).second) throw ValidationError("duplicate conversation id '" + c.id + "'");
    for (const Utterance& u : c.utterances)
      if (!utt_ids.insert(u.id).second) throw ValidationError("duplicate utterance id '" + u.id + "'");
  }
}

namespace {

Conversation conversation_from_json(const json& rec) {
  Conversation conv;
  conv.id = rec.at("id").get<std::string>();
  const json& utts = rec.at("utterances");
  if (!utts.is_array()) throw ValidationError("'utterances' must be an array");
  int index = 0;
  for (const json& u : utts) {
    Utterance utt;
    utt.id = u.at("id").get<std::string>();
    utt.conv_id = conv.id;
    utt.index = ++index;
    utt.speaker = u.at("speaker").get<std::string>();
    const std::string label = u.at("emotion").get<std::string>();
    auto emo = parse_emotion(label);
    if (!emo) throw ValidationError("unknown emotion label '" + label + "'");
    utt.emotion = *emo;
    utt.tokens = split_whitespace(u.at("text").get<std::string>());
    conv.utterances.push_back(std::move(utt));
  }
  if (rec.contains("causal_pairs")) {
    std::set<CausalPair> seen;
    for (const json& p : rec.at("causal_pairs")) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("causal pair must be [target, source]");
      CausalPair cp{p[0].get<int>(), p[1].get<int>()};
      if (!seen.insert(cp).second)
        throw ValidationError("duplicate causal pair (" + std::to_string(cp.target) + "," +
                              std::to_string(cp.source) + ")");
      conv.causal_pairs.push_back(cp);
    }
    std::sort(conv.causal_pairs.begin(), conv.causal_pairs.end());
  }
  return conv;
}

}  // namespace

Corpus parse_corpus(std::string_view text, const std::string& source) {
  Corpus corpus;
  std::unordered_set<std::string> conv_ids;
  std::unordered_set<std::string> utt_ids;
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
      Conversation conv = conversation_from_json(json::parse(line));
      validate_conversation(conv);
      if (!conv_ids.insert(conv.id).second) throw ValidationError("duplicate conversation id '" + conv.id + "'");
      for (const Utterance& u : conv.utterances)
        if (!utt_ids.insert(u.id).second) throw ValidationError("duplicate utterance id '" + u.id + "'");
      corpus.push_back(std::move(conv));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, std::string("malformed record: ") + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path), path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const Conversation& c : corpus) {
    json rec;
    rec["id"] = c.id;
    json utts = json::array();
    for (const Utterance& u : c.utterances) {
      utts.push_back({{"id", u.id},
                      {"speaker", u.speaker},
                      {"emotion", std::string(to_string(u.emotion))},
                      {"text", join(u.tokens, " ")}});
    }
    rec["utterances"] = std::move(utts);
    json pairs = json::array();
    for (const CausalPair& p : c.causal_pairs) pairs.push_back({p.target, p.source});
    rec["causal_pairs"] = std::move(pairs);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  write_file(path, serialize_corpus(corpus));
}

std::vector<PairLabel> enumerate_pairs(const Conversation& conv) {
  std::vector<PairLabel> pairs;
  const int n = conv.size();
  pairs.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j) pairs.push_back({i, j, conv.is_cause(i, j) ? 1 : 0});
  return pairs;
}

StatsReport compute_stats(const Corpus& corpus) {
  StatsReport r;
  std::size_t tokens = 0;
  for (const Conversation& c : corpus) {
    const auto n = static_cast<std::size_t>(c.size());
    const std::size_t total = n * (n + 1) / 2;
    r.positive_pairs += c.causal_pairs.size();
    r.negative_pairs += total - c.causal_pairs.size();
    r.dialogues += 1;
    r.utterances += n;
    for (const Utterance& u : c.utterances) tokens += u.tokens.size();
  }
  if (r.utterances > 0) {
    r.mean_utterance_length = static_cast<double>(tokens) / static_cast<double>(r.utterances);
    r.avg_utterance_length = std::lround(r.mean_utterance_length);
  }
  return r;
}

}  // namespace kec
