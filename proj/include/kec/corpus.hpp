// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kec {

// DailyDialog emotion inventory.
enum class Emotion : std::uint8_t { Neutral, Happiness, Sadness, Anger, Fear, Surprise, Disgust };

inline constexpr std::size_t kEmotionCount = 7;
inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions{
    Emotion::Neutral, Emotion::Happiness, Emotion::Sadness, Emotion::Anger,
    Emotion::Fear,    Emotion::Surprise,  Emotion::Disgust};

std::string_view to_string(Emotion e);
// Accepts the canonical names plus the adjective forms used by RECCON
// ("happy", "sad", "angry", "surprised", ...). Unknown labels yield nullopt.
std::optional<Emotion> parse_emotion(std::string_view label);

struct Utterance {
  std::string id;
  std::string conv_id;
  int index = 0;  // 1-based turn position
  std::string speaker;
  Emotion emotion = Emotion::Neutral;
  std::vector<std::string> tokens;

  bool operator==(const Utterance&) const = default;
};

// (target i, source j), 1-based, j <= i.
struct CausalPair {
  int target = 0;
  int source = 0;

  auto operator<=>(const CausalPair&) const = default;
};

struct Conversation {
  std::string id;
  std::vector<Utterance> utterances;
  std::vector<CausalPair> causal_pairs;  // sorted by (target, source)

  int size() const { return static_cast<int>(utterances.size()); }
  const Utterance& at(int index) const { return utterances.at(static_cast<std::size_t>(index - 1)); }
  bool is_cause(int target, int source) const;

  bool operator==(const Conversation&) const = default;
};

using Corpus = std::vector<Conversation>;

struct PairLabel {
  int target_index = 0;
  int source_index = 0;
  int label = 0;

  bool operator==(const PairLabel&) const = default;
};

struct StatsReport {
  std::size_t positive_pairs = 0;
  std::size_t negative_pairs = 0;
  std::size_t dialogues = 0;
  std::size_t utterances = 0;
  long avg_utterance_length = 0;  // mean token count, rounded to nearest
  double mean_utterance_length = 0.0;

  bool operator==(const StatsReport&) const = default;
};

// Throws ValidationError when any invariant on a single conversation fails:
// contiguous 1-based indices, non-empty tokens, causal pairs with
// 1 <= j <= i <= N, no duplicate pairs, no neutral targets.
void validate_conversation(const Conversation& conv);
// Conversation checks plus corpus-wide uniqueness of conversation and utterance ids.
void validate_corpus(const Corpus& corpus);

// One JSON record per line:
//   {"id": ..., "utterances": [{"id", "speaker", "emotion", "text"}], "causal_pairs": [[i, j], ...]}
// Blank lines are skipped. Errors carry the 1-based line number.
Corpus parse_corpus(std::string_view text, const std::string& source = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// All N(N+1)/2 pairs (i, j) with j <= i, sorted by (i, j).
std::vector<PairLabel> enumerate_pairs(const Conversation& conv);

StatsReport compute_stats(const Corpus& corpus);

}  // namespace kec
